# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled convolution kernels; mirrors numpy_backend's API exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _imax(Py_ssize_t a, Py_ssize_t b) nogil:
    return a if a > b else b


cdef inline Py_ssize_t _imin(Py_ssize_t a, Py_ssize_t b) nogil:
    return a if a < b else b


cdef inline Py_ssize_t _ceil_div(Py_ssize_t a, Py_ssize_t b) nogil:
    # ceiling division for possibly negative numerator
    if a <= 0:
        return 0
    return (a + b - 1) // b


def conv2d_forward(x, w, int stride, int pad):
    """Cross-correlate x (N,C,H,W) with kernels w (O,C,kh,kw)."""
    cdef double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], c = xv.shape[1], h = xv.shape[2], wid = xv.shape[3]
    cdef Py_ssize_t o = wv.shape[0], kh = wv.shape[2], kw = wv.shape[3]
    cdef Py_ssize_t ho = (h + 2 * pad - kh) // stride + 1
    cdef Py_ssize_t wo = (wid + 2 * pad - kw) // stride + 1
    if ho <= 0 or wo <= 0:
        raise ValueError("convolution output size <= 0")
    out = np.zeros((n, o, ho, wo), dtype=np.float64)
    cdef double[:, :, :, ::1] yv = out
    cdef Py_ssize_t b, oc, ic, i, j, oh, ow, ih, iw, oh_lo, oh_hi, ow_lo, ow_hi
    cdef double wval
    with nogil:
        for b in range(n):
            for oc in range(o):
                for ic in range(c):
                    for i in range(kh):
                        oh_lo = _ceil_div(pad - i, stride)
                        oh_hi = _imin(ho - 1, (h - 1 + pad - i) // stride)
                        for j in range(kw):
                            wval = wv[oc, ic, i, j]
                            if wval == 0.0:
                                continue
                            ow_lo = _ceil_div(pad - j, stride)
                            ow_hi = _imin(wo - 1, (wid - 1 + pad - j) // stride)
                            for oh in range(oh_lo, oh_hi + 1):
                                ih = oh * stride + i - pad
                                for ow in range(ow_lo, ow_hi + 1):
                                    iw = ow * stride + j - pad
                                    yv[b, oc, oh, ow] += wval * xv[b, ic, ih, iw]
    return out


def conv2d_backward_kernel(x, gy, int kh, int kw, int stride, int pad):
    """Gradient of the loss w.r.t. the kernels, given upstream gy (N,O,Ho,Wo)."""
    cdef double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, :, :, ::1] gv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], c = xv.shape[1], h = xv.shape[2], wid = xv.shape[3]
    cdef Py_ssize_t o = gv.shape[1], ho = gv.shape[2], wo = gv.shape[3]
    out = np.zeros((o, c, kh, kw), dtype=np.float64)
    cdef double[:, :, :, ::1] gwv = out
    cdef Py_ssize_t b, oc, ic, i, j, oh, ow, ih, iw, oh_lo, oh_hi, ow_lo, ow_hi
    cdef double acc
    with nogil:
        for oc in range(o):
            for ic in range(c):
                for i in range(kh):
                    oh_lo = _ceil_div(pad - i, stride)
                    oh_hi = _imin(ho - 1, (h - 1 + pad - i) // stride)
                    for j in range(kw):
                        ow_lo = _ceil_div(pad - j, stride)
                        ow_hi = _imin(wo - 1, (wid - 1 + pad - j) // stride)
                        acc = 0.0
                        for b in range(n):
                            for oh in range(oh_lo, oh_hi + 1):
                                ih = oh * stride + i - pad
                                for ow in range(ow_lo, ow_hi + 1):
                                    iw = ow * stride + j - pad
                                    acc += gv[b, oc, oh, ow] * xv[b, ic, ih, iw]
                        gwv[oc, ic, i, j] = acc
    return out


def conv2d_backward_input(w, gy, Py_ssize_t h, Py_ssize_t wid, int stride, int pad):
    """Gradient of the loss w.r.t. the input x (N,C,H,W)."""
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, :, :, ::1] gv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t o = wv.shape[0], c = wv.shape[1], kh = wv.shape[2], kw = wv.shape[3]
    cdef Py_ssize_t n = gv.shape[0], ho = gv.shape[2], wo = gv.shape[3]
    out = np.zeros((n, c, h, wid), dtype=np.float64)
    cdef double[:, :, :, ::1] gxv = out
    cdef Py_ssize_t b, oc, ic, i, j, oh, ow, ih, iw, oh_lo, oh_hi, ow_lo, ow_hi
    cdef double wval
    with nogil:
        for b in range(n):
            for oc in range(o):
                for ic in range(c):
                    for i in range(kh):
                        oh_lo = _ceil_div(pad - i, stride)
                        oh_hi = _imin(ho - 1, (h - 1 + pad - i) // stride)
                        for j in range(kw):
                            wval = wv[oc, ic, i, j]
                            if wval == 0.0:
                                continue
                            ow_lo = _ceil_div(pad - j, stride)
                            ow_hi = _imin(wo - 1, (wid - 1 + pad - j) // stride)
                            for oh in range(oh_lo, oh_hi + 1):
                                ih = oh * stride + i - pad
                                for ow in range(ow_lo, ow_hi + 1):
                                    iw = ow * stride + j - pad
                                    gxv[b, ic, ih, iw] += wval * gv[b, oc, oh, ow]
    return out
