"""
Result records.

Every artifact embeds its provenance: the package version and the resolved
configuration text. Output is byte-stable for identical inputs (sorted keys,
no timestamps).
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from quartonsim.log import get_logger


logger = get_logger("record")

SCHEMAS = {
    "sweep": "sweep/1",
    "populations": "populations/1",
    "iq": "iq/1",
    "baths": "baths/1",
    "budget": "budget/1",
    "spectrum": "spectrum/1",
}


@dataclass(frozen=True)
class Provenance:
    """Code version plus resolved configuration text."""
    version: str
    config: str

    def to_dict(self) -> Dict[str, str]:
        return {"version": self.version, "config": self.config}


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy values, tuples and non-finite floats to JSON types."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def dumps(payload: Dict[str, Any], provenance: Provenance) -> str:
    body = dict(to_jsonable(payload))
    body["provenance"] = provenance.to_dict()
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def write_json(path: Union[str, Path], payload: Dict[str, Any], provenance: Provenance) -> Path:
    """Write payload plus provenance as sorted-key JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload, provenance))
    logger.debug(f"Wrote {path}")
    return path


def _cell(value: Any) -> Any:
    value = to_jsonable(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    if value is None:
        return ""
    return value


def write_csv(path: Union[str, Path], columns: Sequence[str], rows: Sequence[Dict[str, Any]],
              provenance: Provenance, schema: str) -> Path:
    """
    Write rows under a versioned schema.

    The file starts with '# schema:', '# version:' and '# config:' comment lines; the
    configuration is folded onto one line with '; ' separators.

    Raises:
        ValueError: If the schema is unknown or a row carries an undeclared column
    """
    if schema not in SCHEMAS.values():
        raise ValueError(f"Unknown schema {schema!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    config_line = "; ".join(
        line.strip() for line in provenance.config.splitlines() if line.strip())
    with open(path, "w", newline="") as f:
        f.write(f"# schema: {schema}\n")
        f.write(f"# version: {provenance.version}\n")
        f.write(f"# config: {config_line}\n")
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            extra = set(row) - set(columns)
            if extra:
                raise ValueError(f"Row has undeclared columns {sorted(extra)}")
            writer.writerow({k: _cell(v) for k, v in row.items()})
    logger.debug(f"Wrote {len(rows)} rows to {path}")
    return path


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Read rows back, skipping the provenance header."""
    with open(path, newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def read_header(path: Union[str, Path]) -> Dict[str, str]:
    """The '# key: value' provenance lines of a CSV artifact."""
    header = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
    return header
