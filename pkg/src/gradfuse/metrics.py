"""No-reference fusion quality metrics.

All functions take the two sources ``a``, ``b`` and the fused image ``f`` as
2-D gray arrays on a 0..255 scale. Information metrics quantize to 256
integer levels (round half up).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import ndimage

from .image import check_same_shape

BINS = 256
METRIC_NAMES = ("nmi", "ncie", "qabf", "pww", "yang", "chen_blum")


class NotDecomposable(ValueError):
    pass


@dataclass(frozen=True)
class MetricReport:
    nmi: float
    ncie: float
    qabf: float
    pww: float
    yang: float
    chen_blum: float

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def mean(cls, reports) -> "MetricReport":
        reports = list(reports)
        return cls(**{f.name: float(np.mean([getattr(r, f.name) for r in reports]))
                      for f in fields(cls)})


# --- information theory -----------------------------------------------------

def _levels(x: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(np.asarray(x, dtype=np.float64) + 0.5), 0, BINS - 1).astype(np.intp).ravel()


def joint_histogram(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """256 x 256 co-occurrence counts of quantized samples (rows index ``x``)."""
    check_same_shape(x, y)
    idx = _levels(x) * BINS + _levels(y)
    return np.bincount(idx, minlength=BINS * BINS).reshape(BINS, BINS)


def _entropy(p: np.ndarray, base: float = 2.0) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)) / math.log(base))


def entropy(x: np.ndarray) -> float:
    counts = np.bincount(_levels(x), minlength=BINS)
    return _entropy(counts / counts.sum())


def _mutual_information(joint: np.ndarray) -> float:
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    nz = p > 0
    outer = np.outer(px, py)
    mi = float(np.sum(p[nz] * np.log2(p[nz] / outer[nz])))
    return max(mi, 0.0)


def mutual_information(x: np.ndarray, y: np.ndarray) -> float:
    """``I(X;Y)`` in bits from the 256-bin joint histogram."""
    return _mutual_information(joint_histogram(x, y))


def nmi(a: np.ndarray, b: np.ndarray, f: np.ndarray) -> float:
    """Normalized mutual information ``2 [I(F;A)/(H(A)+H(F)) + I(F;B)/(H(B)+H(F))]``."""
    check_same_shape(a, b, f)
    h_a, h_b, h_f = entropy(a), entropy(b), entropy(f)
    total = 0.0
    for src, h_src in ((a, h_a), (b, h_b)):
        denom = h_src + h_f
        if denom > 0:
            total += mutual_information(f, src) / denom
    return 2.0 * total


def _rank_bins(x: np.ndarray, bins: int) -> np.ndarray:
    flat = np.asarray(x, dtype=np.float64).ravel()
    order = np.argsort(flat, kind="stable")
    ranks = np.empty(flat.size, dtype=np.int64)
    ranks[order] = np.arange(flat.size)
    return ranks * bins // flat.size


def ncc(x: np.ndarray, y: np.ndarray, bins: int = BINS) -> float:
    """Nonlinear correlation coefficient of two images.

    Samples are ranked and split into ``bins`` equal-occupancy groups, so
    each marginal is (near) uniform; the coefficient is
    ``H(X) + H(Y) - H(X, Y)`` with logarithms to base ``bins``. Ties are
    ranked in raster order, which makes ``ncc(x, x) == 1``.
    """
    check_same_shape(x, y)
    rx, ry = _rank_bins(x, bins), _rank_bins(y, bins)
    joint = np.bincount(rx * bins + ry, minlength=bins * bins).reshape(bins, bins)
    p = joint / joint.sum()
    return (_entropy(p.sum(axis=1), bins) + _entropy(p.sum(axis=0), bins)
            - _entropy(p.ravel(), bins))


def ncie(a: np.ndarray, b: np.ndarray, f: np.ndarray, bins: int = BINS) -> float:
    check_same_shape(a, b, f)
    ab, af, bf = ncc(a, b, bins), ncc(a, f, bins), ncc(b, f, bins)
    r = np.array([[1.0, ab, af], [ab, 1.0, bf], [af, bf, 1.0]])
    lam = np.clip(np.linalg.eigvalsh(r), 0.0, None) / 3.0
    lam = lam[lam > 0]
    return float(1.0 + np.sum(lam * np.log(lam)) / math.log(bins))


# --- edge preservation --------------------------------------------------------

@dataclass(frozen=True)
class QabfParams:
    gamma_g: float = 0.9994
    kappa_g: float = -15.0
    sigma_g: float = 0.5
    gamma_a: float = 0.9879
    kappa_a: float = -22.0
    sigma_a: float = 0.8
    weight_exp: float = 1.0
    additive: bool = False


_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = np.array([[1, 2, 1], [0, 0, 0], [-1, -2, -1]], dtype=np.float64)


def sobel(img: np.ndarray):
    img = np.asarray(img, dtype=np.float64)
    return (ndimage.correlate(img, _SOBEL_X, mode="nearest"),
            ndimage.correlate(img, _SOBEL_Y, mode="nearest"))


def _orientation(sx, sy):
    out = np.full(sx.shape, np.pi / 2)
    nz = sx != 0
    out[nz] = np.arctan(sy[nz] / sx[nz])
    return out


def _preservation(g_src, a_src, g_f, a_f, prm: QabfParams):
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(g_src > g_f, g_f / g_src, g_src / g_f)
    ratio = np.where(g_src == g_f, 1.0, ratio)
    align = 1.0 - np.abs(a_src - a_f) / (np.pi / 2)
    q_g = prm.gamma_g / (1.0 + np.exp(prm.kappa_g * (ratio - prm.sigma_g)))
    q_a = prm.gamma_a / (1.0 + np.exp(prm.kappa_a * (align - prm.sigma_a)))
    return q_g + q_a if prm.additive else q_g * q_a


def edge_preservation(grads_a, grads_b, grads_f, prm: QabfParams = QabfParams()) -> float:
    """Weighted edge-transfer score from precomputed ``(gx, gy)`` pairs."""
    (ax, ay), (bx, by), (fx, fy) = grads_a, grads_b, grads_f
    g_a, g_b, g_f = np.hypot(ax, ay), np.hypot(bx, by), np.hypot(fx, fy)
    al_a, al_b, al_f = _orientation(ax, ay), _orientation(bx, by), _orientation(fx, fy)
    q_af = _preservation(g_a, al_a, g_f, al_f, prm)
    q_bf = _preservation(g_b, al_b, g_f, al_f, prm)
    w_a, w_b = g_a ** prm.weight_exp, g_b ** prm.weight_exp
    denom = float(np.sum(w_a + w_b))
    if denom == 0:
        return 0.0
    return float(np.sum(q_af * w_a + q_bf * w_b) / denom)


def qabf(a: np.ndarray, b: np.ndarray, f: np.ndarray, params: QabfParams = QabfParams()) -> float:
    """Xydeas-Petrovic edge preservation with Sobel gradients."""
    check_same_shape(a, b, f)
    return edge_preservation(sobel(a), sobel(b), sobel(f), params)


def haar_level(img: np.ndarray):
    """One level of the orthonormal 2-D Haar transform: ``(approx, d_x, d_y, d_xy)``.

    ``d_x`` differences neighboring columns and ``d_y`` neighboring rows.
    """
    p, q = img[0::2, 0::2], img[0::2, 1::2]
    r, s = img[1::2, 0::2], img[1::2, 1::2]
    return ((p + q + r + s) / 2, (q - p + s - r) / 2, (r + s - p - q) / 2, (p - q - r + s) / 2)


def pww(a: np.ndarray, b: np.ndarray, f: np.ndarray, levels: int = 3, alphas=None,
        params: QabfParams = QabfParams()) -> float:
    """Multi-scale edge preservation ``prod_l Q_l ** alpha_l`` over Haar levels.

    Each level scores its column/row detail bands as horizontal/vertical
    gradient components with the Qabf preservation model.
    """
    check_same_shape(a, b, f)
    alphas = (1.0,) * levels if alphas is None else tuple(alphas)
    if len(alphas) != levels:
        raise ValueError("need one exponent per level")
    h, w = np.shape(a)
    if levels < 1 or h % 2 ** levels or w % 2 ** levels:
        raise NotDecomposable(f"{w}x{h} cannot be split into {levels} dyadic levels")
    cur = [np.asarray(x, dtype=np.float64) for x in (a, b, f)]
    score = 1.0
    for alpha in alphas:
        bands = [haar_level(x) for x in cur]
        q_l = edge_preservation(*[(d_x, d_y) for _, d_x, d_y, _ in bands], params)
        score *= q_l ** alpha
        cur = [band[0] for band in bands]
    return float(score)


# --- structural similarity ----------------------------------------------------

def _window_stats(x, y, win):
    r = win // 2
    crop = (slice(r, -r or None),) * 2
    mean = lambda z: ndimage.uniform_filter(z, win, mode="nearest")[crop]  # noqa: E731
    mx, my = mean(x), mean(y)
    vx = np.maximum(mean(x * x) - mx * mx, 0.0)
    vy = np.maximum(mean(y * y) - my * my, 0.0)
    cxy = mean(x * y) - mx * my
    return mx, my, vx, vy, cxy


def ssim_map(x: np.ndarray, y: np.ndarray, win: int = 7, dynamic_range: float = 255.0):
    """SSIM over every fully-inside ``win x win`` window; also returns the two variances."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    mx, my, vx, vy, cxy = _window_stats(x, y, win)
    s = ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
    return s, vx, vy


def yang(a: np.ndarray, b: np.ndarray, f: np.ndarray, win: int = 7, threshold: float = 0.75) -> float:
    """Yang's SSIM-based score with the 0.75 similarity switch."""
    check_same_shape(a, b, f)
    s_ab, v_a, v_b = ssim_map(a, b, win)
    s_af, _, _ = ssim_map(a, f, win)
    s_bf, _, _ = ssim_map(b, f, win)
    tot = v_a + v_b
    lam = np.where(tot > 0, v_a / np.where(tot > 0, tot, 1.0), 0.5)
    q = np.where(s_ab >= threshold, lam * s_af + (1 - lam) * s_bf, np.maximum(s_af, s_bf))
    return float(q.mean())


# --- human perception -----------------------------------------------------------

@dataclass(frozen=True)
class ChenBlumParams:
    degrees_per_image: float = 30.0
    sigma_center: float = 2.0
    sigma_surround: float = 4.0
    kernel_radius: int = 15
    k: float = 1.0
    h: float = 1.0
    p: float = 3.0
    q: float = 2.0
    z: float = 1e-4


def mannos_sakrison(r: np.ndarray) -> np.ndarray:
    """Contrast sensitivity at radial frequency ``r`` in cycles/degree."""
    return 2.6 * (0.0192 + 0.114 * r) * np.exp(-((0.114 * r) ** 1.1))


def _gaussian_taps(sigma, radius):
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    return np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2 * sigma * sigma)) / (2 * np.pi * sigma * sigma)


def _masked_contrast(img, prm: ChenBlumParams):
    h, w = img.shape
    fy = np.fft.fftfreq(h) * (h / prm.degrees_per_image)
    fx = np.fft.fftfreq(w) * (w / prm.degrees_per_image)
    csf = mannos_sakrison(np.hypot(fy[:, None], fx[None, :]))
    filtered = np.fft.ifft2(np.fft.fft2(img) * csf).real
    center = ndimage.correlate(filtered, _gaussian_taps(prm.sigma_center, prm.kernel_radius), mode="nearest")
    surround = ndimage.correlate(filtered, _gaussian_taps(prm.sigma_surround, prm.kernel_radius), mode="nearest")
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.abs(center / surround - 1.0)
    c = np.where(np.isfinite(c), c, 0.0)
    return prm.k * c ** prm.p / (prm.h * c ** prm.q + prm.z)


def _ratio(x, y):
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(hi > 0, lo / np.where(hi > 0, hi, 1.0), 1.0)


def chen_blum(a: np.ndarray, b: np.ndarray, f: np.ndarray,
              params: ChenBlumParams = ChenBlumParams()) -> float:
    """Chen-Blum perceptual score: saliency-weighted contrast preservation."""
    check_same_shape(a, b, f)
    ca, cb, cf = (_masked_contrast(np.asarray(x, dtype=np.float64), params) for x in (a, b, f))
    sal_a, sal_b = ca * ca, cb * cb
    tot = sal_a + sal_b
    lam_a = np.where(tot > 0, sal_a / np.where(tot > 0, tot, 1.0), 0.5)
    q = lam_a * _ratio(ca, cf) + (1 - lam_a) * _ratio(cb, cf)
    return float(q.mean())


# --- aggregate --------------------------------------------------------------------

METRICS = {
    "nmi": nmi,
    "ncie": ncie,
    "qabf": qabf,
    "pww": pww,
    "yang": yang,
    "chen_blum": chen_blum,
}


def evaluate(a, b, f, names=METRIC_NAMES) -> dict:
    """Evaluate a subset of metrics by name."""
    unknown = set(names) - set(METRICS)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    return {n: METRICS[n](a, b, f) for n in names}


def evaluate_all(a, b, f) -> MetricReport:
    return MetricReport(**evaluate(a, b, f))
