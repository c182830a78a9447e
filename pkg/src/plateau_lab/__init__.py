"""Discrete energies, areas and quasiconformality diagnostics for maps of the disc into metric targets."""

from .errors import PlateauLabError
from .mesh import DiscMesh, make_disc_mesh
from .plmap import PLMap, affine_map, identity_map, map_from_function
from .seminorm import NormDescriptor, Seminorm2, i_avg, i_plus, q_factor
from .target import BiDisc, EuclideanCone, EuclideanSpace, JordanBoundary, NormedPlane
from .volume import ALL_VOLUMES, VolumeDefinition, jacobian, norm_constant

__version__ = "0.1.0"
