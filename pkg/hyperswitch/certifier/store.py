"""File store for certificates and audit reports."""

import json
import logging
from pathlib import Path
from typing import Optional, Union

from hyperswitch.certifier.schemas import AuditReport, Certificate
from hyperswitch.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CERTIFICATE_FILE = "certificate.json"
AUDIT_FILE = "audit.md"
AUDIT_JSON_FILE = "audit.json"


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def save_certificate(certificate: Certificate, path: PathLike) -> Path:
    """Write a certificate as JSON. A directory path gets the default file name."""
    path = Path(path)
    if path.suffix != ".json":
        path = _ensure_dir(path) / CERTIFICATE_FILE
    else:
        _ensure_dir(path.parent)
    path.write_text(certificate.to_json(), encoding="utf-8")
    logger.info(f"Certificate written to {path}")
    return path


def load_certificate(path: PathLike) -> Certificate:
    """
    Raises:
        ConfigurationError: The file does not exist
        pydantic.ValidationError: The file is not a valid certificate
    """
    path = Path(path)
    if path.is_dir():
        path = path / CERTIFICATE_FILE
    if not path.exists():
        raise ConfigurationError(f"certificate file not found: {path}")
    return Certificate.from_json(path.read_text(encoding="utf-8"))


def persist_report(report: AuditReport, out_dir: PathLike, markdown: Optional[str] = None) -> Path:
    """Persist an audit report (JSON, plus Markdown when given) and return the Markdown or JSON path."""
    out_dir = _ensure_dir(Path(out_dir))
    json_path = out_dir / AUDIT_JSON_FILE
    json_path.write_text(json.dumps(report.model_dump(mode="json"), indent=2), encoding="utf-8")
    if markdown is None:
        return json_path
    md_path = out_dir / AUDIT_FILE
    md_path.write_text(markdown, encoding="utf-8")
    return md_path
