# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-frame message-passing kernels.

Same update equations and guards as the NumPy backend; plain C loops with the
leave-one-out sums computed as total-minus-own-term, which keeps each kernel
linear in the device count.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, expm1, log, log1p

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double _softplus(double x) noexcept nogil:
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


cdef inline double _clip(double x, double c) noexcept nogil:
    if x > c:
        return c
    if x < -c:
        return -c
    return x


cdef void _sn_update(const double[:, :, ::1] llr_vs, const double[:, ::1] y,
                     const double[:, ::1] h, double noise_var, double var_floor,
                     double clip, double[:, :, ::1] out,
                     double[::1] cm, double[::1] cv) noexcept nogil:
    cdef Py_ssize_t n_ant = llr_vs.shape[0]
    cdef Py_ssize_t n_dev = llr_vs.shape[1]
    cdef Py_ssize_t n_slot = llr_vs.shape[2]
    cdef Py_ssize_t m, s, p
    cdef double tot_u, tot_v, pr, hv, u, v
    for m in range(n_ant):
        for p in range(n_slot):
            tot_u = 0.0
            tot_v = 0.0
            for s in range(n_dev):
                pr = _sigmoid(llr_vs[m, s, p])
                hv = h[m, s]
                cm[s] = hv * pr
                cv[s] = hv * hv * (pr * (1.0 - pr))
                tot_u += cm[s]
                tot_v += cv[s]
            for s in range(n_dev):
                u = tot_u - cm[s]
                v = tot_v - cv[s] + noise_var
                if v < var_floor:
                    v = var_floor
                hv = h[m, s]
                out[m, s, p] = _clip(
                    ((y[m, p] - u) * (2.0 * hv) - hv * hv) / (2.0 * v), clip)


cdef void _vn_to_cn(const double[:, :, ::1] llr_s, double prior, double clip,
                    double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n_ant = llr_s.shape[0]
    cdef Py_ssize_t n_dev = llr_s.shape[1]
    cdef Py_ssize_t n_slot = llr_s.shape[2]
    cdef Py_ssize_t m, s, p
    cdef double acc
    for s in range(n_dev):
        for p in range(n_slot):
            acc = 0.0
            for m in range(n_ant):
                acc += llr_s[m, s, p]
            out[s, p] = _clip(acc + prior, clip)


cdef void _cn_update(const double[:, ::1] llr_vc, double log_pa, double log_clip,
                     double clip, double[:, ::1] out, double[::1] sp) noexcept nogil:
    cdef Py_ssize_t n_dev = llr_vc.shape[0]
    cdef Py_ssize_t n_slot = llr_vc.shape[1]
    cdef Py_ssize_t s, p
    cdef double tot, lt
    for s in range(n_dev):
        tot = 0.0
        for p in range(n_slot):
            sp[p] = _softplus(llr_vc[s, p])
            tot += sp[p]
        for p in range(n_slot):
            lt = log_pa - (tot - sp[p])
            if lt > -log_clip:
                lt = -log_clip
            out[s, p] = _clip(-log(expm1(-lt)), clip)


cdef void _vn_to_sn(const double[:, :, ::1] llr_s, const double[:, ::1] llr_c,
                    double prior, double clip, double[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t n_ant = llr_s.shape[0]
    cdef Py_ssize_t n_dev = llr_s.shape[1]
    cdef Py_ssize_t n_slot = llr_s.shape[2]
    cdef Py_ssize_t m, s, p
    cdef double tot, base
    for s in range(n_dev):
        for p in range(n_slot):
            tot = 0.0
            for m in range(n_ant):
                tot += llr_s[m, s, p]
            base = llr_c[s, p] + prior
            for m in range(n_ant):
                out[m, s, p] = _clip((tot - llr_s[m, s, p]) + base, clip)


cdef void _output(const double[:, :, ::1] llr_s, const double[:, ::1] llr_c,
                  double prior, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n_ant = llr_s.shape[0]
    cdef Py_ssize_t n_dev = llr_s.shape[1]
    cdef Py_ssize_t n_slot = llr_s.shape[2]
    cdef Py_ssize_t m, s, p
    cdef double acc
    for s in range(n_dev):
        for p in range(n_slot):
            acc = 0.0
            for m in range(n_ant):
                acc += llr_s[m, s, p]
            out[s, p] = (acc + prior) + llr_c[s, p]


def sn_update(llr_vn_to_sn, y, h, double noise_var, double var_floor, double llr_clip):
    l_vs = np.ascontiguousarray(llr_vn_to_sn, dtype=np.float64)
    yc = np.ascontiguousarray(y, dtype=np.float64)
    hc = np.ascontiguousarray(h, dtype=np.float64)
    out = np.empty_like(l_vs)
    cm = np.empty(l_vs.shape[1])
    cv = np.empty(l_vs.shape[1])
    _sn_update(l_vs, yc, hc, noise_var, var_floor, llr_clip, out, cm, cv)
    return out


def vn_to_cn_update(llr_sn_to_vn, double prior_llr, double llr_clip):
    l_s = np.ascontiguousarray(llr_sn_to_vn, dtype=np.float64)
    out = np.empty(l_s.shape[1:])
    _vn_to_cn(l_s, prior_llr, llr_clip, out)
    return out


def cn_update(llr_vn_to_cn, double log_act_prob, double log_clip, double llr_clip):
    l_vc = np.ascontiguousarray(llr_vn_to_cn, dtype=np.float64)
    out = np.empty_like(l_vc)
    sp = np.empty(l_vc.shape[1])
    _cn_update(l_vc, log_act_prob, log_clip, llr_clip, out, sp)
    return out


def vn_to_sn_update(llr_sn_to_vn, llr_cn_to_vn, double prior_llr, double llr_clip):
    l_s = np.ascontiguousarray(llr_sn_to_vn, dtype=np.float64)
    l_c = np.ascontiguousarray(llr_cn_to_vn, dtype=np.float64)
    out = np.empty_like(l_s)
    _vn_to_sn(l_s, l_c, prior_llr, llr_clip, out)
    return out


def output_llr(llr_sn_to_vn, llr_cn_to_vn, double prior_llr):
    l_s = np.ascontiguousarray(llr_sn_to_vn, dtype=np.float64)
    l_c = np.ascontiguousarray(llr_cn_to_vn, dtype=np.float64)
    out = np.empty(l_s.shape[1:])
    _output(l_s, l_c, prior_llr, out)
    return out


def run_detect(y, h, double noise_var, double log_act_prob, double prior_llr,
               int n_iterations, double llr_clip, double log_clip, double var_floor):
    """Full single-frame detection loop; returns the output LLR matrix."""
    yc = np.ascontiguousarray(y, dtype=np.float64)
    hc = np.ascontiguousarray(h, dtype=np.float64)
    cdef Py_ssize_t n_ant = hc.shape[0]
    cdef Py_ssize_t n_dev = hc.shape[1]
    cdef Py_ssize_t n_slot = yc.shape[1]

    llr_vs_a = np.zeros((n_ant, n_dev, n_slot))
    llr_s_a = np.empty((n_ant, n_dev, n_slot))
    llr_vc_a = np.empty((n_dev, n_slot))
    llr_c_a = np.empty((n_dev, n_slot))
    out_a = np.empty((n_dev, n_slot))
    cm_a = np.empty(n_dev)
    cv_a = np.empty(n_dev)
    sp_a = np.empty(n_slot)

    cdef double[:, :, ::1] llr_vs = llr_vs_a
    cdef double[:, :, ::1] llr_s = llr_s_a
    cdef double[:, ::1] llr_vc = llr_vc_a
    cdef double[:, ::1] llr_c = llr_c_a
    cdef double[:, ::1] out = out_a
    cdef double[::1] cm = cm_a
    cdef double[::1] cv = cv_a
    cdef double[::1] sp = sp_a
    cdef double[:, ::1] yv = yc
    cdef double[:, ::1] hv = hc
    cdef int it

    with nogil:
        for it in range(n_iterations):
            _sn_update(llr_vs, yv, hv, noise_var, var_floor, llr_clip, llr_s, cm, cv)
            _vn_to_cn(llr_s, prior_llr, llr_clip, llr_vc)
            _cn_update(llr_vc, log_act_prob, log_clip, llr_clip, llr_c, sp)
            _vn_to_sn(llr_s, llr_c, prior_llr, llr_clip, llr_vs)
        _output(llr_s, llr_c, prior_llr, out)
    return out_a
