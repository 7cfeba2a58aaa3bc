import json

from motifarc.config import RunConfig, write_sidecar
from motifarc.ecc import LDPC


def test_defaults_round_trip():
    cfg = RunConfig()
    back = RunConfig.from_dict(cfg.to_dict())
    assert back.to_dict() == cfg.to_dict()


def test_file_overrides_defaults(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "seed": 99,
        "ecc": {"scheme": LDPC, "data_bits": 12000, "redundancy": 0.3},
        "channel": {"coverage": 7, "error_rate": 0.02, "seed": 0},
    }))
    cfg = RunConfig.load(path)
    assert cfg.seed == 99
    assert cfg.ecc.scheme == LDPC and cfg.ecc.redundancy == 0.3
    assert cfg.channel.coverage == 7
    # untouched sections keep their defaults
    assert cfg.layout.data_columns_per_oligo == 16


def test_sidecar_contents(tmp_path):
    artifact = tmp_path / "pool.fasta"
    artifact.write_text(">x\nACGT\n")
    side = write_sidecar(artifact, RunConfig(), {"oligos": 1})
    payload = json.loads(side.read_text())
    assert payload["tool"] == "motifarc"
    assert payload["kernels"] in ("compiled", "python")
    assert payload["config"]["seed"] == 1
    assert payload["oligos"] == 1
