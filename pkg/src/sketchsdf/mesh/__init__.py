from ..fields.types import TriangleMesh
from .complete import LeakyShellWarning, complete_field
from .extract import enclosed_volume, marching_cubes_dual
from .objio import export_obj, import_obj, obj_bytes

__all__ = [
    "TriangleMesh",
    "LeakyShellWarning",
    "complete_field",
    "enclosed_volume",
    "marching_cubes_dual",
    "export_obj",
    "import_obj",
    "obj_bytes",
]
