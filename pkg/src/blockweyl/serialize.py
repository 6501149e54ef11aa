"""JSON encoding with complex numbers stored as [re, im] pairs."""
import json
import math

import numpy as np

from .exceptions import ModelError
from .model import load_model


def _num(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def to_jsonable(obj):
    """Recursively convert arrays and complex scalars; matrices become row-major nested lists."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(np.stack([obj.real, obj.imag], axis=-1).tolist())
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def dumps(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2)


def decode_matrix(raw, L=None):
    """Matrix from nested lists; entries may be reals or [re, im] pairs."""
    if isinstance(raw, (int, float)):
        raw = [[raw]]
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        out = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == 2:
        out = arr.astype(complex)
    elif arr.ndim == 1 and arr.shape == (2,) and L in (None, 1):
        out = np.array([[arr[0] + 1j * arr[1]]])
    else:
        raise ValueError(f"cannot decode matrix of shape {arr.shape}")
    if L is not None and out.shape != (L, L):
        raise ValueError(f"matrix has shape {out.shape}, expected {(L, L)}")
    return out


def load_model_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ModelError(f"cannot read model file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file {path} is not valid JSON: {exc}") from exc
    return load_model(data)


def extension_record(ext):
    """JSON-ready description of an ExtensionSpec."""
    return {
        "zeta": complex(ext.zeta),
        "V": ext.V,
        "self_adjoint": ext.self_adjoint,
        "equal_indices": ext.equal_indices,
        "n_zeta": ext.limit_zeta.n_z,
        "n_zetabar": ext.limit_zetabar.n_z,
        "gram": ext.gram,
        "gram_horizon": ext.gram_horizon,
        "gram_increment": ext.gram_increment,
        "gram_converged": ext.gram_converged,
        "notes": list(ext.notes),
    }
