"""Finite element kernel: meshes, materials, assembly, STEP extraction."""

from .materials import Material, POLYSILICON
from .mesh import Mesh, generate_mesh, parse_msh, write_msh
from .assembly import FeModel, assemble_linear
from .step import step_extract

__all__ = ["Material", "POLYSILICON", "Mesh", "generate_mesh", "parse_msh",
           "write_msh", "FeModel", "assemble_linear", "step_extract"]
