import os
import subprocess
import sys

import pytest

PLOTS_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PLOTS_DIR)


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Pipeline outputs produced through the primary CLI's public interface."""
    base = tmp_path_factory.mktemp("artifacts")
    bundle = base / "bundle"
    subprocess.run(
        ["cropknn", "synth", "--out", str(bundle),
         "--classes", "maize,cassava,common_bean", "--fields-per-class", "10",
         "--noise", "0.03", "--seed", "5"],
        check=True,
    )
    subprocess.run(
        ["cropknn", "bands", "--bundle", str(bundle), "--out", str(base),
         "--indices", "NDVI,GCVI"],
        check=True,
    )
    subprocess.run(
        ["cropknn", "experiment", "--bundle", str(bundle), "--out", str(base),
         "--seed", "5", "--k-candidates", "1,3,5"],
        check=True,
    )
    return base
