"""Text serialization: matrices for golden files, CSV at full precision."""
import json

import numpy as np

FLOAT_FMT = "%.16e"  # 17 significant digits


def format_float(x) -> str:
    return FLOAT_FMT % float(x)


def save_matrix(path, mat):
    """Line-oriented matrix format: header 'rows cols', one 're,im' per cell,
    row-major."""
    mat = np.asarray(mat, dtype=complex)
    with open(path, "w") as fh:
        fh.write(f"{mat.shape[0]} {mat.shape[1]}\n")
        for row in mat:
            for cell in row:
                fh.write(f"{format_float(cell.real)},{format_float(cell.imag)}\n")


def load_matrix(path):
    with open(path) as fh:
        rows, cols = (int(t) for t in fh.readline().split())
        data = np.empty((rows, cols), dtype=complex)
        for i in range(rows):
            for j in range(cols):
                re_s, im_s = fh.readline().strip().split(",")
                data[i, j] = complex(float(re_s), float(im_s))
    return data


def write_csv(path, header, rows):
    """CSV with deterministic full-precision float formatting."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, bool):
                    cells.append(str(int(cell)))
                elif isinstance(cell, (int, np.integer)):
                    cells.append(str(int(cell)))
                elif isinstance(cell, (float, np.floating)):
                    cells.append(format_float(cell))
                else:
                    cells.append(str(cell))
            fh.write(",".join(cells) + "\n")


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
