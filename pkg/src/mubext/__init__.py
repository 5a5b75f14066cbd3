"""Extremality of noisy mutually unbiased basis pairs via the Haagerup matrix."""

from .errors import (
    IncompatiblePair,
    InvalidArgument,
    InvalidMatrix,
    MubError,
    NotFound,
    NumericalFailure,
    OutOfRange,
    ParseError,
    Unsupported,
)
from .extremality import (
    Certificate,
    RegionPoint,
    arc_polyline,
    certify_fourier,
    certify_gamma_point,
    certify_qubit,
    certify_vertex,
    gamma_parametrize,
    region_contains,
    symmetric_arc_point,
)
from .finite_group import AbelianGroup, make_group, pairing, parse_group, verify_bicharacter
from .haagerup import HaagerupSpectrum, haagerup_matrix, has_minus_one, spectrum
from .mub_catalog import MubPair, catalog_mub, fourier_mub, hadamard_to_mub, load_hadamard, save_hadamard
from .numerics import DEFAULT_TOL, Tolerances, eig_sym, gram_rank
from .povm import JointObservable, Observable, luders_joint, noisy, qubit_joint, sharp_observables, vertex_joint

__version__ = "0.1.0"
