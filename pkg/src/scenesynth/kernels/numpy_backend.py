"""Pure-numpy convolution kernels (im2col + BLAS matmul)."""

from __future__ import annotations

import numpy as np


def _out_size(size: int, k: int, stride: int, pad: int) -> int:
    out = (size + 2 * pad - k) // stride + 1
    if out <= 0:
        raise ValueError(f"convolution output size {out} <= 0 (input {size}, kernel {k}, pad {pad})")
    return out


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int) -> np.ndarray:
    """(N, C*kh*kw, Ho*Wo) patch matrix of the padded input."""
    n, c, h, w = x.shape
    ho = _out_size(h, kh, stride, pad)
    wo = _out_size(w, kw, stride, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    s0, s1, s2, s3 = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp, (n, c, kh, kw, ho, wo), (s0, s1, s2, s3, s2 * stride, s3 * stride)
    )
    return view.reshape(n, c * kh * kw, ho * wo)


def conv2d_forward(x: np.ndarray, w: np.ndarray, stride: int, pad: int) -> np.ndarray:
    """Cross-correlate x (N,C,H,W) with kernels w (O,C,kh,kw)."""
    n, c, h, wid = x.shape
    o, _, kh, kw = w.shape
    ho = _out_size(h, kh, stride, pad)
    wo = _out_size(wid, kw, stride, pad)
    cols = _im2col(x, kh, kw, stride, pad)
    y = np.matmul(w.reshape(o, -1), cols)
    return y.reshape(n, o, ho, wo)


def conv2d_backward_kernel(x: np.ndarray, gy: np.ndarray, kh: int, kw: int, stride: int, pad: int) -> np.ndarray:
    """Gradient of the loss w.r.t. the kernels, given upstream gy (N,O,Ho,Wo)."""
    n, o, ho, wo = gy.shape
    c = x.shape[1]
    cols = _im2col(x, kh, kw, stride, pad)
    gw = np.tensordot(gy.reshape(n, o, ho * wo), cols, axes=([0, 2], [0, 2]))
    return gw.reshape(o, c, kh, kw)


def conv2d_backward_input(w: np.ndarray, gy: np.ndarray, h: int, wid: int, stride: int, pad: int) -> np.ndarray:
    """Gradient of the loss w.r.t. the input (col2im scatter of W^T gy)."""
    n, o, ho, wo = gy.shape
    _, c, kh, kw = w.shape
    colgrad = np.matmul(w.reshape(o, -1).T, gy.reshape(n, o, ho * wo))
    colgrad = colgrad.reshape(n, c, kh, kw, ho, wo)
    gxp = np.zeros((n, c, h + 2 * pad, wid + 2 * pad))
    for i in range(kh):
        for j in range(kw):
            gxp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += colgrad[:, :, i, j]
    return gxp[:, :, pad : pad + h, pad : pad + wid] if pad else gxp
