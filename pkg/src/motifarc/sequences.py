"""Sequence records and FASTA serialization for oligo pools and read sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

_COMPLEMENT = str.maketrans("ACGT", "TGCA")


def reverse_complement(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]


@dataclass
class OligoRecord:
    """A designed oligo: payload motifs plus primers, addressed (oe, ob, row)."""

    oe: int
    ob: int
    row: int
    payload: str
    left_primer: str = ""
    right_primer: str = ""

    @property
    def sequence(self) -> str:
        return self.left_primer + self.payload + self.right_primer


@dataclass
class ReadRecord:
    """An observed sequence, optionally carrying ground-truth provenance."""

    sequence: str
    src: tuple[int, int, int] | None = None
    improper: bool = False


def write_pool_fasta(out: TextIO, pool: Iterable[OligoRecord]) -> None:
    for rec in pool:
        out.write(f">oe={rec.oe} ob={rec.ob} row={rec.row}\n{rec.sequence}\n")


def read_pool_fasta(inp: TextIO) -> list[OligoRecord]:
    """Pool FASTA back to records; primers are not split back out."""
    pool = []
    for header, seq in _fasta_items(inp):
        fields = dict(kv.split("=") for kv in header.split())
        pool.append(
            OligoRecord(
                oe=int(fields["oe"]),
                ob=int(fields["ob"]),
                row=int(fields["row"]),
                payload=seq,
            )
        )
    return pool


def write_reads_fasta(
    out: TextIO, reads: Iterable[ReadRecord], with_provenance: bool = True
) -> None:
    for i, rec in enumerate(reads):
        tag = f">r{i}"
        if with_provenance and rec.src is not None:
            tag += f" src={rec.src[0]}:{rec.src[1]}:{rec.src[2]}"
        if with_provenance and rec.improper:
            tag += " improper=1"
        out.write(f"{tag}\n{rec.sequence}\n")


def read_reads_fasta(inp: TextIO) -> list[ReadRecord]:
    reads = []
    for header, seq in _fasta_items(inp):
        src = None
        improper = False
        for token in header.split()[1:]:
            key, _, val = token.partition("=")
            if key == "src":
                a, b, c = val.split(":")
                src = (int(a), int(b), int(c))
            elif key == "improper":
                improper = val == "1"
        reads.append(ReadRecord(seq, src, improper))
    return reads


def _fasta_items(inp: TextIO) -> Iterator[tuple[str, str]]:
    header = None
    chunks: list[str] = []
    for line in inp:
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if header is not None:
                yield header, "".join(chunks)
            header = line[1:]
            chunks = []
        else:
            chunks.append(line.upper())
    if header is not None:
        yield header, "".join(chunks)
