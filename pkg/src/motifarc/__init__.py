"""motifarc: columnar motif-based DNA archival storage, end to end.

Encode binary files into constraint-valid oligo pools, simulate the
synthesis/PCR/sequencing channel, decode through clustering, motif
consensus and integrated error correction, and evaluate costs and biases.
"""

from ._kernels import IMPLEMENTATION as kernel_implementation

__version__ = "0.1.0"
__all__ = ["kernel_implementation", "__version__"]
