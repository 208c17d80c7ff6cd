import math
import shutil
import subprocess

import pytest

THETA = 0.25 * math.pi


@pytest.fixture(scope="session")
def hemisphere_verify_csv(tmp_path_factory):
    """Depth-4 hemisphere per-point CSV, produced through the solver CLI."""
    if shutil.which("grasshopper") is None:
        pytest.fail("the grasshopper CLI must be installed to generate fixtures")
    work = tmp_path_factory.mktemp("verify")
    grid = work / "g4.grid"
    subprocess.run(["grasshopper", "build-grid", "--depth", "4",
                    "--out", str(grid)], check=True, capture_output=True)
    col = work / "hem.col"
    col.write_text(f"COLv1 depth=4 n=1281 theta={THETA:.17g}\n" + "1" * 1281 + "\n")
    subprocess.run(["grasshopper", "verify", "--grid", str(grid),
                    "--col", str(col), "--out", str(work)],
                   check=True, capture_output=True)
    return work / "hem_points.csv"


@pytest.fixture()
def sweep_results_csv(tmp_path):
    """Three sweep rows in the solver's results format, all above hemisphere."""
    header = ("theta,c,algorithm,seed,init,p,p_hem,p_minus_hem,p_over_hem,"
              "bell_c,steps,accepted,wall_time")
    rows = []
    for c_val, p in [(5.0, 0.65), (7.0, 0.725), (9.0, 0.79)]:
        theta = 2 * math.pi / c_val
        p_hem = 1 - theta / math.pi
        rows.append(
            f"{theta:.17g},{c_val},sa,0,random,{p:.17g},{p_hem:.17g},"
            f"{p - p_hem:.17g},{p / p_hem:.17g},{1 - 2 * p:.17g},100,50,1.0"
        )
    path = tmp_path / "results.csv"
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path
