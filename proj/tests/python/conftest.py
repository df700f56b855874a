import os
from pathlib import Path

import pytest


def pytest_configure(config):
    # ctest points SCALEFIT_PYTHON_DIR at the build tree; make sure that is the
    # module under test and not an installed copy.
    expected = os.environ.get("SCALEFIT_PYTHON_DIR")
    if not expected:
        return
    import scalefit._scalefit as ext

    if not Path(ext.__file__).resolve().is_relative_to(Path(expected).resolve()):
        raise pytest.UsageError(f"scalefit imported from {ext.__file__}, not the build tree {expected}; "
                                "an installed copy shadows it")
