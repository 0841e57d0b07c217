"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np


class FormatError(ValueError):
    """Raised when a file on disk does not follow its declared layout."""


def check_image(img, *, channels=None, min_size=1, name="image", allow_nonfinite=False):
    """Return ``img`` as a float64 ``(H, W, C)`` array after checking its shape.

    A 2-D array is promoted to a single-channel image. ``channels`` may be an int, a
    tuple of allowed counts, ``"any"``, or None (meaning 1 or 3).
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"{name} must have shape (H, W, C), got {arr.shape}")
    h, w, c = arr.shape
    if channels == "any":
        pass
    elif channels is not None:
        allowed = (channels,) if isinstance(channels, int) else tuple(channels)
        if c not in allowed:
            raise ValueError(f"{name} must have {' or '.join(map(str, allowed))} channels, got {c}")
    elif c not in (1, 3):
        raise ValueError(f"{name} must have 1 or 3 channels, got {c}")
    if h < min_size or w < min_size:
        raise ValueError(f"{name} is {h}x{w}; at least {min_size}x{min_size} required")
    if not allow_nonfinite and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_pair(y, y_pred, *, channels=None, min_size=1):
    y = check_image(y, channels=channels, min_size=min_size, name="y")
    y_pred = check_image(y_pred, channels=channels, min_size=min_size, name="y_pred")
    if y.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {y_pred.shape}")
    return y, y_pred


def check_images(X, *, channels=3, min_size=2):
    """Accept one image or a batch and return a list of validated images.

    A 4-D array or a list of arrays is treated as a batch.
    """
    if isinstance(X, (list, tuple)):
        return [check_image(x, channels=channels, min_size=min_size) for x in X]
    arr = np.asarray(X)
    if arr.ndim == 4:
        return [check_image(x, channels=channels, min_size=min_size) for x in arr]
    return [check_image(arr, channels=channels, min_size=min_size)]
