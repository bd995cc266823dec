"""System data model and physical/characteristic conversions."""
