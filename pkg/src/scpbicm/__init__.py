"""Spatially coupled protograph LDPC codes for BICM-ID over AWGN.

Subpackages cover protograph construction and coupling, PEG lifting and
encoding, constellations and labelings, bit-level interleaving, the
demap/decode physical layer, hierarchical EXIT threshold analysis, and an
experiment harness with a CLI front end (``scp-bicm``).
"""

__version__ = "0.1.0"
