"""Run configuration: defaults < config file < command-line flags.

Every artifact-producing command echoes the effective configuration into a
sidecar JSON next to its output, together with the seeds, so any artifact
can be reproduced byte-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, kernel_implementation
from .channel import ChannelParams
from .clustering import ClusterParams
from .decoding import DecodeParams
from .ecc import EccConfig
from .layout import LayoutParams
from .motifs import MotifConstraints


@dataclass
class RunConfig:
    constraints: MotifConstraints = field(default_factory=MotifConstraints)
    bits_per_motif: int = 12
    ecc: EccConfig = field(default_factory=EccConfig)
    layout: LayoutParams = field(default_factory=LayoutParams)
    channel: ChannelParams = field(default_factory=ChannelParams)
    decode: DecodeParams = field(default_factory=DecodeParams)
    clustering: ClusterParams = field(default_factory=ClusterParams)
    seed: int = 1
    threads: int = 1

    def to_dict(self) -> dict:
        return {
            "constraints": self.constraints.to_dict(),
            "bits_per_motif": self.bits_per_motif,
            "ecc": self.ecc.to_dict(),
            "layout": self.layout.to_dict(),
            "channel": self.channel.to_dict(),
            "decode": self.decode.to_dict(),
            "clustering": self.clustering.to_dict(),
            "seed": self.seed,
            "threads": self.threads,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        cfg = cls()
        if "constraints" in d:
            cfg.constraints = MotifConstraints.from_dict(d["constraints"])
        if "bits_per_motif" in d:
            cfg.bits_per_motif = d["bits_per_motif"]
        if "ecc" in d:
            cfg.ecc = EccConfig.from_dict(d["ecc"])
        if "layout" in d:
            cfg.layout = LayoutParams.from_dict(d["layout"])
        if "channel" in d:
            cfg.channel = ChannelParams.from_dict(d["channel"])
        if "decode" in d:
            cfg.decode = DecodeParams.from_dict(d["decode"])
        if "clustering" in d:
            cfg.clustering = ClusterParams.from_dict(d["clustering"])
        cfg.seed = d.get("seed", cfg.seed)
        cfg.threads = d.get("threads", cfg.threads)
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def write_sidecar(artifact_path: str | Path, config: RunConfig, extra: dict | None = None) -> Path:
    """Reproducibility sidecar written next to every produced artifact."""
    side = Path(str(artifact_path) + ".run.json")
    payload = {
        "tool": "motifarc",
        "version": __version__,
        "kernels": kernel_implementation,
        "config": config.to_dict(),
    }
    if extra:
        payload.update(extra)
    with open(side, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return side
