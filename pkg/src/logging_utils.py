import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from constants import RUN_LOG_NAME, TOOL_VERSION


def _append_jsonl_record(path_str: str, record: Dict[str, Any]) -> None:
    path = Path(path_str)
    path.parent.mkdir(parents=True, exist_ok=True)
    line = json.dumps(record, ensure_ascii=False) + "\n"
    with path.open("a", encoding="utf-8") as f:
        f.write(line)


def _file_sha256(path_str: Optional[str]) -> str:
    if not path_str:
        return ""
    path = Path(path_str)
    if not path.exists():
        return ""
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    """
    What a run consumed and produced.

    Everything except run_id and ts is a pure function of the inputs, so two runs
    with equal manifests emit byte-identical tables.
    """

    subcommand: str
    config_path: str
    config_sha256: str
    tolerances: Dict[str, float]
    run_id: str
    outputs: List[str] = field(default_factory=list)
    inputs: Dict[str, str] = field(default_factory=dict)
    tool_version: str = TOOL_VERSION

    def add_output(self, path: Path | str) -> None:
        text = str(path)
        if text not in self.outputs:
            self.outputs.append(text)

    def to_record(self) -> Dict[str, Any]:
        return {
            "record_type": "run",
            "request_id": self.run_id,
            "ts": datetime.now(timezone.utc).isoformat(),
            "subcommand": self.subcommand,
            "config_path": self.config_path,
            "config_sha256": self.config_sha256,
            "tool_version": self.tool_version,
            "tolerances": dict(self.tolerances),
            "outputs": list(self.outputs),
            "inputs": dict(self.inputs),
        }


def _log_run(out_dir: Path, manifest: RunManifest) -> bool:
    path = out_dir / RUN_LOG_NAME
    try:
        _append_jsonl_record(str(path), manifest.to_record())
    except Exception:
        logging.getLogger(__name__).warning("Failed to write run log to %s", path, exc_info=True)
        return False
    return True


def _log_audit(out_dir: Path, run_id: str, counts: Dict[str, int], scope: str) -> None:
    record = {
        "record_type": "audit",
        "request_id": run_id,
        "ts": datetime.now(timezone.utc).isoformat(),
        "scope": scope,
        "total": int(counts.get("total") or 0),
        "passed": int(counts.get("passed") or 0),
        "failed": int(counts.get("failed") or 0),
    }
    path = out_dir / RUN_LOG_NAME
    try:
        _append_jsonl_record(str(path), record)
    except Exception:
        logging.getLogger(__name__).warning("Failed to write audit log to %s", path, exc_info=True)


def _runs_from_log(out_dir: Path, record_type: str = "run") -> List[Dict[str, Any]]:
    """Records of one type from runs.jsonl; unreadable lines are skipped."""
    path = out_dir / RUN_LOG_NAME
    if not path.exists():
        return []
    records: List[Dict[str, Any]] = []
    try:
        with path.open("r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except Exception:
                    continue
                if isinstance(rec, dict) and rec.get("record_type") == record_type:
                    records.append(rec)
    except Exception:
        logging.getLogger(__name__).warning("Failed to read run log %s", path, exc_info=True)
        return []
    return records
