from .assembly import (
    AssembledOperator,
    FeField,
    assemble_mass,
    assemble_stiffness,
    boundary_load,
    boundary_restriction,
    observation_matrix,
    space_dim,
)
from .backend import backend_name, get_backend
from .mesh import Mesh, build_rect_mesh

__all__ = [
    "AssembledOperator",
    "FeField",
    "Mesh",
    "assemble_mass",
    "assemble_stiffness",
    "backend_name",
    "boundary_load",
    "boundary_restriction",
    "build_rect_mesh",
    "get_backend",
    "observation_matrix",
    "space_dim",
]
