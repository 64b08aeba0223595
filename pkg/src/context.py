import argparse
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from laminate import BilayerSpec, LaminateSpec, ScaleSet
from logging_utils import RunManifest


@dataclass
class RunContext:
    args: argparse.Namespace
    config: Dict[str, Any]
    spec: LaminateSpec
    bilayer: Optional[BilayerSpec]
    scales: ScaleSet
    out_dir: Path
    manifest: RunManifest

    @property
    def run_id(self) -> str:
        return self.manifest.run_id

    def output(self, name: str) -> Path:
        """Path under the output directory, recorded in the manifest."""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.manifest.add_output(path)
        return path
