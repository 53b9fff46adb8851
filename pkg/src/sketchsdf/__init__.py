"""Two-stage voxel SDF diffusion for sketch- and category-conditioned 3D shape generation."""

__version__ = "0.1.0"
