import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# When run from a build tree, test that build's module even if an editable
# install of the package is also present (its import hook would win).
_stage = os.environ.get("IDKIT_PY_STAGE")
if _stage:
    sys.path.insert(0, _stage)
    sys.meta_path[:] = [f for f in sys.meta_path
                        if "RedirectingFinder" not in type(f).__name__]
