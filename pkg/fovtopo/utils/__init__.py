from .paths import make_output_dir, seed_dir

__all__ = ["make_output_dir", "seed_dir"]
