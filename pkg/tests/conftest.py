import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian(n, rho, seed):
    r = np.random.default_rng(seed)
    cov = np.array([[1.0, rho], [rho, 1.0]])
    return r.multivariate_normal([0.0, 0.0], cov, size=n)


def ci_normal(n, seed, rho_xz=0.0, rho_xy=0.7, rho_yz=0.6):
    r = np.random.default_rng(seed)
    cov = np.array([[1.0, rho_xy, rho_xz], [rho_xy, 1.0, rho_yz], [rho_xz, rho_yz, 1.0]])
    return r.multivariate_normal(np.zeros(3), cov, size=n)


def markov_chain(n, seed, rho=0.7):
    """Columns (X, Y, Z) with X -> Z -> Y, so X and Y are independent given Z."""
    r = np.random.default_rng(seed)
    x = r.normal(size=n)
    z = rho * x + np.sqrt(1 - rho ** 2) * r.normal(size=n)
    y = rho * z + np.sqrt(1 - rho ** 2) * r.normal(size=n)
    return np.column_stack([x, y, z])


# Synthetic files in the distributed UCI layouts. Values are random but the
# heart diagnosis depends on the recommended attributes, so selection has
# something to find.

HEART_COUNTS = {"cleveland.data": 282, "hungarian.data": 294, "switzerland.data": 123,
                "long-beach-va.data": 200}


def heart_record(r, idx):
    from depmeter.datasets import HEART_ATTRIBUTES, HEART_RECOMMENDED
    vals = {a: float(r.integers(0, 5)) for a in HEART_ATTRIBUTES[:-1]}
    vals["id"] = float(idx)
    for a in HEART_RECOMMENDED:
        vals[a] = round(float(r.normal(50, 10)), 1)
    vals["num"] = float(np.clip(round((vals["age"] + vals["chol"] - 100) / 8
                                      + r.normal()), 0, 4))
    if r.random() < 0.05:
        vals["ca"] = -9.0
    toks = [f"{vals[a]:g}" for a in HEART_ATTRIBUTES[:-1]] + ["name"]
    # the raw files wrap each record over ten lines
    return "\n".join(" ".join(toks[i:i + 8]) for i in range(0, 76, 8)) + "\n"


def write_heart(directory, counts=None, seed=0):
    r = np.random.default_rng(seed)
    idx = 0
    for name, k in (counts or HEART_COUNTS).items():
        parts = []
        for _ in range(k):
            idx += 1
            parts.append(heart_record(r, idx))
        (directory / name).write_text("".join(parts))
    return directory


def write_wine(path, n=300, seed=0):
    from depmeter.datasets import WINE_COLUMNS
    r = np.random.default_rng(seed)
    x = r.normal(size=(n, 11)) + 5
    q = np.round(x[:, 10] + 0.3 * x[:, 1] + 0.5 * r.normal(size=n))
    lines = [";".join(f'"{c}"' for c in WINE_COLUMNS)]
    lines += [";".join(f"{v:.4f}" for v in row) + f";{int(qq)}" for row, qq in zip(x, q)]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_beijing(path, start=(2010, 3, 30), hours=1400, seed=0, hole=None):
    import datetime as dt
    r = np.random.default_rng(seed)
    t0 = dt.datetime(*start)
    pm, pres = 80.0, 1015.0
    rows = ["No,year,month,day,hour,pm2.5,DEWP,TEMP,PRES,cbwd,Iws,Is,Ir"]
    for i in range(hours):
        t = t0 + dt.timedelta(hours=i)
        pres = 1015 + 0.9 * (pres - 1015) + r.normal()
        pm = max(1.0, 20 + 0.8 * pm - 0.5 * (pres - 1015) + 10 * r.normal())
        pm_s = "NA" if (hole is not None and t == dt.datetime(*hole)) or i < 5 else f"{pm:.0f}"
        wind = ("NW", "cv", "SE", "NE")[int(r.integers(0, 4))]
        rows.append(f"{i + 1},{t.year},{t.month},{t.day},{t.hour},{pm_s},{r.integers(-20, 10)},"
                    f"{r.integers(-5, 25)},{pres:.0f},{wind},{r.random() * 20:.2f},0,0")
    path.write_text("\n".join(rows) + "\n")
    return path


@pytest.fixture
def heart_dir(tmp_path):
    d = tmp_path / "heart"
    d.mkdir()
    return write_heart(d)


@pytest.fixture
def wine_file(tmp_path):
    return write_wine(tmp_path / "winequality-white.csv")


@pytest.fixture
def beijing_file(tmp_path):
    return write_beijing(tmp_path / "PRSA.csv")


# One line per acceptance criterion, repeated at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
