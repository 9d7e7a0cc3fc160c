import os
import pathlib
import sys

# single-threaded BLAS: the suite's matmuls are small, and the acceptance
# benchmark runs two worker processes on two cores; letting each spawn
# its own BLAS pool oversubscribes and slows everything down
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

sys.path.insert(0, str(pathlib.Path(__file__).parent))
