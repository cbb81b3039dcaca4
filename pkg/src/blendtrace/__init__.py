"""blendtrace: program embeddings from blended symbolic + concrete execution traces.

Subpackages
-----------
- ``minilang``   tiny traced imperative language (parse, run, record traces)
- ``traces``     symbolic / state / blended trace model and path selection
- ``nd``         float64 tensors with reverse-mode gradients, Adam, checkpoints
- ``model``      fusion-attention trace encoder and program classifier
- ``namer``      sequence decoder for method-name prediction + sub-token metrics
- ``transforms`` semantics-preserving program transforms and stability protocol
- ``datasets``   synthetic corpus generators and the tracing pipeline
- ``cli``        command-line entry points
"""
import os as _os

# Cap BLAS worker pools before numpy loads anywhere in the package; explicit
# OPENBLAS/OMP/MKL settings in the environment still win.
_threads = _os.environ.get("LIGERLAB_THREADS")
if _threads:
    for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
del _os, _threads

__version__ = "0.1.0"
