//! Channel model and closed-form second-moment algebra.
//!
//! A PIMAC instance has `J` transmitters. Transmitters `0..J-1` are the
//! uplink users of a base station (receiver 0); transmitter `J-1` is the
//! point-to-point link whose receiver is receiver 1. Every transmitter reaches
//! both receivers.
//!
//! Complex scalars are handled in the real domain by lifting `h` to the
//! rotation-scaling matrix `[[Re h, −Im h], [Im h, Re h]]`. In the lifted
//! domain the noise is `(σ²/2)·I`, so a proper signal of power `p` has the
//! covariance `(p/2)·I` and lifted rates coincide with complex rates.

use std::borrow::Borrow;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{logdet_pd, min_eigenvalue};

/// Relative tolerance for PSD checks.
pub const TOL_PSD: f64 = 1e-9;
/// Absolute slack allowed on power caps.
pub const TOL_CAP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numeric degeneracy: {0}")]
    Degenerate(String),
}

/// Which receiver-side decoding rule applies to the real streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decoding {
    /// Every other stream is treated as noise.
    Parallel,
    /// Streams are decoded in stream-index order; stream `k` no longer sees
    /// streams `m < k` of any transmitter.
    Successive,
}

/// Complex gains of the 2×J network with noise variance and power caps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    gains: DMatrix<Complex64>,
    noise_variance: f64,
    power_caps: Vec<f64>,
}

impl ChannelInstance {
    pub fn new(
        gains: DMatrix<Complex64>,
        noise_variance: f64,
        power_caps: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if gains.nrows() != 2 {
            return Err(ModelError::InvalidChannel(format!(
                "expected 2 receivers, got {}",
                gains.nrows()
            )));
        }
        let j = gains.ncols();
        if j < 3 {
            return Err(ModelError::InvalidChannel(format!(
                "need at least 3 transmitters, got {j}"
            )));
        }
        if power_caps.len() != j {
            return Err(ModelError::InvalidChannel(format!(
                "{} power caps for {j} transmitters",
                power_caps.len()
            )));
        }
        if power_caps.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(ModelError::InvalidChannel("power caps must be finite and ≥ 0".into()));
        }
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(ModelError::InvalidChannel("noise variance must be finite and ≥ 0".into()));
        }
        if gains.iter().any(|h| !(h.re.is_finite() && h.im.is_finite())) {
            return Err(ModelError::InvalidChannel("gains must be finite".into()));
        }
        Ok(Self { gains, noise_variance, power_caps })
    }

    /// Builds a channel from `(magnitude, phase)` pairs, one row per receiver.
    pub fn from_polar(
        rows: &[Vec<(f64, f64)>],
        noise_variance: f64,
        power_caps: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if rows.len() != 2 || rows[0].len() != rows[1].len() {
            return Err(ModelError::InvalidChannel("expected two rows of equal length".into()));
        }
        let j = rows[0].len();
        let gains = DMatrix::from_fn(2, j, |i, c| {
            let (m, ph) = rows[i][c];
            Complex64::from_polar(m, ph)
        });
        Self::new(gains, noise_variance, power_caps)
    }

    /// Transmitter count `J`.
    pub fn users(&self) -> usize {
        self.gains.ncols()
    }

    /// Index of the point-to-point transmitter.
    pub fn p2p(&self) -> usize {
        self.users() - 1
    }

    /// Receiver that decodes transmitter `j`.
    pub fn receiver(&self, j: usize) -> usize {
        usize::from(j == self.p2p())
    }

    pub fn gain(&self, i: usize, j: usize) -> Complex64 {
        self.gains[(i, j)]
    }

    pub fn gains(&self) -> &DMatrix<Complex64> {
        &self.gains
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Noise variance per real dimension.
    pub fn lifted_noise(&self) -> f64 {
        0.5 * self.noise_variance
    }

    pub fn power_caps(&self) -> &[f64] {
        &self.power_caps
    }

    pub fn with_caps(&self, power_caps: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(self.gains.clone(), self.noise_variance, power_caps)
    }

    pub fn with_uniform_caps(&self, cap: f64) -> Result<Self, ModelError> {
        self.with_caps(vec![cap; self.users()])
    }

    /// The first `j` transmitters, with the last of them acting as the
    /// point-to-point link.
    pub fn truncated(&self, j: usize) -> Result<Self, ModelError> {
        if j > self.users() {
            return Err(ModelError::InvalidArgument(format!(
                "cannot keep {j} of {} transmitters",
                self.users()
            )));
        }
        Self::new(
            self.gains.columns(0, j).into_owned(),
            self.noise_variance,
            self.power_caps[..j].to_vec(),
        )
    }

    pub fn lifted(&self, i: usize, j: usize) -> RealChannelMatrix {
        lift_channel(self.gain(i, j))
    }

    pub fn extended(&self, i: usize, j: usize, n: usize) -> Result<ExtendedChannelMatrix, ModelError> {
        extend_channel(&self.lifted(i, j), n)
    }

    fn require_noise(&self) -> Result<(), ModelError> {
        if self.noise_variance > 0.0 {
            Ok(())
        } else {
            Err(ModelError::InvalidChannel("rate and SINR evaluation needs σ² > 0".into()))
        }
    }
}

/// Variance and pseudo-variance of a complex Gaussian signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedCovariance {
    variance: f64,
    pseudo_variance: Complex64,
}

impl AugmentedCovariance {
    pub fn new(variance: f64, pseudo_variance: Complex64) -> Result<Self, ModelError> {
        if !(variance.is_finite() && variance >= 0.0) {
            return Err(ModelError::InvalidArgument(format!("variance {variance} must be ≥ 0")));
        }
        if pseudo_variance.norm() > variance * (1.0 + 1e-12) + 1e-300 {
            return Err(ModelError::InvalidArgument(format!(
                "|pseudo-variance| {} exceeds variance {variance}",
                pseudo_variance.norm()
            )));
        }
        Ok(Self { variance, pseudo_variance })
    }

    pub fn proper(variance: f64) -> Result<Self, ModelError> {
        Self::new(variance, Complex64::new(0.0, 0.0))
    }

    pub fn zero() -> Self {
        Self { variance: 0.0, pseudo_variance: Complex64::new(0.0, 0.0) }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn pseudo_variance(&self) -> Complex64 {
        self.pseudo_variance
    }

    pub fn is_proper(&self) -> bool {
        self.pseudo_variance == Complex64::new(0.0, 0.0)
    }

    /// Real 2×2 covariance of `(Re x, Im x)`.
    pub fn lifted(&self) -> Matrix2<f64> {
        let c = self.variance;
        let z = self.pseudo_variance;
        Matrix2::new(0.5 * (c + z.re), 0.5 * z.im, 0.5 * z.im, 0.5 * (c - z.re))
    }
}

/// Lifted real 2×2 channel `[[a, −b], [b, a]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealChannelMatrix {
    entries: Matrix2<f64>,
}

impl RealChannelMatrix {
    pub fn new(entries: Matrix2<f64>) -> Result<Self, ModelError> {
        let scale = entries.abs().max().max(1.0);
        let ok = (entries[(0, 0)] - entries[(1, 1)]).abs() <= 1e-12 * scale
            && (entries[(0, 1)] + entries[(1, 0)]).abs() <= 1e-12 * scale;
        if !ok {
            return Err(ModelError::InvalidArgument(
                "lifted channel must have the form [[a, -b], [b, a]]".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &Matrix2<f64> {
        &self.entries
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(2, 2, |i, j| self.entries[(i, j)])
    }
}

/// Block-diagonal `I_N ⊗ G` acting on `N` stacked lifted symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedChannelMatrix {
    entries: DMatrix<f64>,
    extension_length: usize,
}

impl ExtendedChannelMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn extension_length(&self) -> usize {
        self.extension_length
    }
}

pub fn lift_channel(h: Complex64) -> RealChannelMatrix {
    RealChannelMatrix { entries: Matrix2::new(h.re, -h.im, h.im, h.re) }
}

pub fn extend_channel(g: &RealChannelMatrix, n: usize) -> Result<ExtendedChannelMatrix, ModelError> {
    if n == 0 {
        return Err(ModelError::InvalidArgument("extension length must be ≥ 1".into()));
    }
    let mut entries = DMatrix::zeros(2 * n, 2 * n);
    for b in 0..n {
        for i in 0..2 {
            for j in 0..2 {
                entries[(2 * b + i, 2 * b + j)] = g.entries[(i, j)];
            }
        }
    }
    Ok(ExtendedChannelMatrix { entries, extension_length: n })
}

/// Real symmetric PSD covariance of one transmitter in the lifted domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitCovariance {
    matrix: DMatrix<f64>,
    user: usize,
}

impl TransmitCovariance {
    /// Checks symmetry and positive semidefiniteness.
    pub fn new(matrix: DMatrix<f64>, user: usize) -> Result<Self, ModelError> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() % 2 != 0 || matrix.nrows() == 0 {
            return Err(ModelError::InvalidArgument("covariance must be square of even size".into()));
        }
        let scale = matrix.abs().max().max(1e-300);
        if (&matrix - matrix.transpose()).abs().max() > 1e-9 * scale {
            return Err(ModelError::InvalidArgument("covariance must be symmetric".into()));
        }
        let tr = matrix.trace().abs();
        if min_eigenvalue(&matrix) < -TOL_PSD * tr.max(1e-12) {
            return Err(ModelError::InvalidArgument("covariance must be PSD".into()));
        }
        Ok(Self { matrix, user })
    }

    /// Also checks the per-channel-use power cap `Tr(Q)/N ≤ P`.
    pub fn with_cap(matrix: DMatrix<f64>, user: usize, cap: f64) -> Result<Self, ModelError> {
        let q = Self::new(matrix, user)?;
        if q.power() > cap + TOL_CAP {
            return Err(ModelError::InvalidArgument(format!(
                "power {} exceeds cap {cap}",
                q.power()
            )));
        }
        Ok(q)
    }

    /// Covariance `(p/2)·I` of a proper signal of power `p` per channel use.
    pub fn proper(power: f64, n: usize, user: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * n, 2 * n) * (0.5 * power), user }
    }

    /// Zero covariance for an extension of length `n`.
    pub fn zero(n: usize, user: usize) -> Self {
        Self { matrix: DMatrix::zeros(2 * n, 2 * n), user }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn user(&self) -> usize {
        self.user
    }

    /// Extension length implied by the matrix size.
    pub fn extension_length(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Transmit power per channel use.
    pub fn power(&self) -> f64 {
        self.matrix.trace() / self.extension_length() as f64
    }

    /// `I_N ⊗ Q` for a single-symbol covariance `Q`.
    pub fn replicated(&self, n: usize) -> Self {
        let d = self.matrix.nrows();
        let mut m = DMatrix::zeros(d * n, d * n);
        for b in 0..n {
            m.view_mut((b * d, b * d), (d, d)).copy_from(&self.matrix);
        }
        Self { matrix: m, user: self.user }
    }
}

impl AsRef<DMatrix<f64>> for TransmitCovariance {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl Borrow<DMatrix<f64>> for TransmitCovariance {
    fn borrow(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Direction on the rate simplex; `alpha4 = alpha1 + alpha2` weights the
/// MAC sum-rate row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateProfile {
    alpha: [f64; 3],
}

impl RateProfile {
    pub fn new(alpha: [f64; 3]) -> Result<Self, ModelError> {
        if alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0 && *a <= 1.0)) {
            return Err(ModelError::InvalidArgument(format!("profile {alpha:?} must lie in [0,1]")));
        }
        let s: f64 = alpha.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(ModelError::InvalidArgument(format!("profile {alpha:?} must sum to 1")));
        }
        Ok(Self { alpha })
    }

    /// Normalizes a nonnegative, nonzero direction onto the simplex.
    pub fn from_direction(direction: [f64; 3]) -> Result<Self, ModelError> {
        let s: f64 = direction.iter().sum();
        if direction.iter().any(|a| !(a.is_finite() && *a >= 0.0)) || !(s > 0.0) {
            return Err(ModelError::InvalidArgument(format!("bad direction {direction:?}")));
        }
        let mut a = direction.map(|x| x / s);
        let last = 1.0 - a[0] - a[1];
        a[2] = last.max(0.0);
        Self::new(a)
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    pub fn alpha4(&self) -> f64 {
        self.alpha[0] + self.alpha[1]
    }

    /// Weights of the four rate rows (user 1, user 2, P2P, MAC sum).
    pub fn weights(&self) -> [f64; 4] {
        [self.alpha[0], self.alpha[1], self.alpha[2], self.alpha4()]
    }
}

/// The four TIN rate bounds in bits per channel use: user 1, user 2, the
/// point-to-point user and the MAC sum rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

impl RateBounds {
    pub fn as_array(&self) -> [f64; 4] {
        [self.l1, self.l2, self.l3, self.l4]
    }
}

/// Transmit and receive beamformers with stream powers.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamLayout {
    v: Vec<Vec<DVector<f64>>>,
    p: Vec<Vec<f64>>,
    u: Vec<Vec<DVector<f64>>>,
    decoding: Decoding,
}

impl StreamLayout {
    pub fn new(
        v: Vec<Vec<DVector<f64>>>,
        p: Vec<Vec<f64>>,
        u: Vec<Vec<DVector<f64>>>,
        decoding: Decoding,
    ) -> Result<Self, ModelError> {
        if v.len() != p.len() || v.len() != u.len() {
            return Err(ModelError::InvalidArgument("layout user counts differ".into()));
        }
        let dim = v.first().and_then(|s| s.first()).map(|x| x.len()).unwrap_or(0);
        for j in 0..v.len() {
            if v[j].len() != p[j].len() || v[j].len() != u[j].len() {
                return Err(ModelError::InvalidArgument(format!("user {j}: stream counts differ")));
            }
            for k in 0..v[j].len() {
                for x in [&v[j][k], &u[j][k]] {
                    if x.len() != dim || (x.norm() - 1.0).abs() > 1e-10 {
                        return Err(ModelError::InvalidArgument(format!(
                            "stream ({j},{k}): beamformers must be unit vectors of length {dim}"
                        )));
                    }
                }
                if !(p[j][k] >= 0.0 && p[j][k].is_finite()) {
                    return Err(ModelError::InvalidArgument(format!("stream ({j},{k}): power < 0")));
                }
            }
        }
        Ok(Self { v, p, u, decoding })
    }

    pub fn users(&self) -> usize {
        self.v.len()
    }

    pub fn streams(&self, j: usize) -> usize {
        self.v[j].len()
    }

    pub fn v(&self, j: usize, k: usize) -> &DVector<f64> {
        &self.v[j][k]
    }

    pub fn u(&self, j: usize, k: usize) -> &DVector<f64> {
        &self.u[j][k]
    }

    pub fn power(&self, j: usize, k: usize) -> f64 {
        self.p[j][k]
    }

    pub fn powers(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn decoding(&self) -> Decoding {
        self.decoding
    }

    pub fn with_powers(&self, p: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        Self::new(self.v.clone(), p, self.u.clone(), self.decoding)
    }

    /// Transmit covariance `Σ_k p_jk v_jk v_jkᵀ` of user `j`.
    pub fn covariance(&self, j: usize) -> DMatrix<f64> {
        let d = self.v[j][0].len();
        let mut q = DMatrix::zeros(d, d);
        for k in 0..self.v[j].len() {
            q += self.p[j][k] * &self.v[j][k] * self.v[j][k].transpose();
        }
        q
    }
}

/// Streams `(l, m)` that interfere with stream `(j, k)` at its receiver.
pub fn stream_interferers(
    streams: &[usize],
    j: usize,
    k: usize,
    decoding: Decoding,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (l, &count) in streams.iter().enumerate() {
        for m in 0..count {
            if (l, m) == (j, k) {
                continue;
            }
            if decoding == Decoding::Successive && m < k {
                continue;
            }
            out.push((l, m));
        }
    }
    out
}

/// Desired-signal and interference-plus-noise covariances of one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamCovariance {
    pub t: DMatrix<f64>,
    pub f: DMatrix<f64>,
}

/// `T_jk` and `F_jk` (or the successive-decoding `F′_jk`) for every stream,
/// indexed `[j][k]`.
pub fn stream_covariances(
    ch: &ChannelInstance,
    layout: &StreamLayout,
    n: usize,
) -> Result<Vec<Vec<StreamCovariance>>, ModelError> {
    if layout.users() != ch.users() {
        return Err(ModelError::InvalidArgument("layout and channel user counts differ".into()));
    }
    let d = 2 * n;
    let counts: Vec<usize> = (0..ch.users()).map(|j| layout.streams(j)).collect();
    let mut g = Vec::with_capacity(2);
    for i in 0..2 {
        let mut row = Vec::with_capacity(ch.users());
        for j in 0..ch.users() {
            row.push(ch.extended(i, j, n)?.entries.clone());
        }
        g.push(row);
    }
    let received = |i: usize, l: usize, m: usize| -> DMatrix<f64> {
        let gv = &g[i][l] * layout.v(l, m);
        layout.power(l, m) * &gv * gv.transpose()
    };
    let mut out = Vec::with_capacity(ch.users());
    for j in 0..ch.users() {
        if layout.v(j, 0).len() != d {
            return Err(ModelError::InvalidArgument(format!(
                "user {j}: beamformer length {} does not match extension {n}",
                layout.v(j, 0).len()
            )));
        }
        let i = ch.receiver(j);
        let mut per = Vec::with_capacity(counts[j]);
        for k in 0..counts[j] {
            let t = received(i, j, k);
            let mut f = DMatrix::identity(d, d) * ch.lifted_noise();
            for (l, m) in stream_interferers(&counts, j, k, layout.decoding()) {
                f += received(i, l, m);
            }
            per.push(StreamCovariance { t, f });
        }
        out.push(per);
    }
    Ok(out)
}

/// Rayleigh-quotient SINR `uᵀTu / uᵀFu`.
pub fn sinr(t: &DMatrix<f64>, f: &DMatrix<f64>, u: &DVector<f64>) -> Result<f64, ModelError> {
    if u.norm() == 0.0 {
        return Err(ModelError::InvalidArgument("receive filter must be nonzero".into()));
    }
    if nalgebra::Cholesky::new(f.clone()).is_none() {
        return Err(ModelError::Degenerate("interference-plus-noise covariance is singular".into()));
    }
    let den = u.dot(&(f * u));
    Ok((u.dot(&(t * u)) / den).max(0.0))
}

/// Variance and pseudo-variance received at `rx` from the transmitters in `set`,
/// including the noise variance.
pub fn received_moments(
    ch: &ChannelInstance,
    rx: usize,
    set: &[usize],
    sig: &[AugmentedCovariance],
) -> (f64, Complex64) {
    let mut var = ch.noise_variance();
    let mut pvar = Complex64::new(0.0, 0.0);
    for &j in set {
        let h = ch.gain(rx, j);
        var += h.norm_sqr() * sig[j].variance();
        pvar += h * h * sig[j].pseudo_variance();
    }
    (var, pvar)
}

fn half_log2_ratio(num: (f64, Complex64), den: (f64, Complex64)) -> Result<f64, ModelError> {
    let n = num.0 * num.0 - num.1.norm_sqr();
    let d = den.0 * den.0 - den.1.norm_sqr();
    let scale = den.0 * den.0;
    if !(d > 1e-12 * scale) || !(n > 0.0) {
        return Err(ModelError::Degenerate(format!("rate ratio {n}/{d} is not positive")));
    }
    Ok((0.5 * (n / d).log2()).max(0.0))
}

/// The four TIN rate bounds of a three-user instance under (possibly
/// improper) Gaussian inputs.
pub fn rate_bounds_improper(
    ch: &ChannelInstance,
    sig: &[AugmentedCovariance],
) -> Result<RateBounds, ModelError> {
    if ch.users() != 3 {
        return Err(ModelError::InvalidArgument("rate bounds need J = 3".into()));
    }
    if sig.len() != 3 {
        return Err(ModelError::InvalidArgument("need one augmented covariance per user".into()));
    }
    ch.require_noise()?;
    let m = |rx: usize, set: &[usize]| received_moments(ch, rx, set, sig);
    let s1 = m(0, &[2]);
    Ok(RateBounds {
        l1: half_log2_ratio(m(0, &[0, 2]), s1)?,
        l2: half_log2_ratio(m(0, &[1, 2]), s1)?,
        l3: half_log2_ratio(m(1, &[0, 1, 2]), m(1, &[0, 1]))?,
        l4: half_log2_ratio(m(0, &[0, 1, 2]), s1)?,
    })
}

/// Signal and interference sets of one user under successive decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingSet {
    pub user: usize,
    pub receiver: usize,
    /// Transmitters in the numerator covariance (desired plus interference).
    pub signal: Vec<usize>,
    /// Transmitters that remain as interference.
    pub interference: Vec<usize>,
}

/// Decoding sets for a given order of the MAC users. The base station decodes
/// `order[0]` first; each MAC user sees the MAC users decoded after it and the
/// point-to-point transmitter as interference. The point-to-point receiver
/// treats all MAC users as noise.
pub fn decoding_sets(users: usize, order: &[usize]) -> Result<Vec<DecodingSet>, ModelError> {
    let mac = users - 1;
    let mut seen = vec![false; mac];
    if order.len() != mac {
        return Err(ModelError::InvalidArgument(format!("order must list all {mac} MAC users")));
    }
    for &j in order {
        if j >= mac || seen[j] {
            return Err(ModelError::InvalidArgument(format!("order {order:?} is not a permutation")));
        }
        seen[j] = true;
    }
    let mut out = Vec::with_capacity(users);
    for (pos, &j) in order.iter().enumerate() {
        let mut interference: Vec<usize> = order[pos + 1..].to_vec();
        interference.push(mac);
        let mut signal = vec![j];
        signal.extend(&interference);
        out.push(DecodingSet { user: j, receiver: 0, signal, interference });
    }
    out.push(DecodingSet {
        user: mac,
        receiver: 1,
        signal: (0..users).collect(),
        interference: (0..mac).collect(),
    });
    out.sort_by_key(|s| s.user);
    Ok(out)
}

/// The identity order `0, 1, …, J−2`.
pub fn natural_order(users: usize) -> Vec<usize> {
    (0..users - 1).collect()
}

/// Received covariance `(σ²/2)·I + Σ_{l∈set} S_il Q_l S_ilᵀ` at receiver `rx`.
pub fn received_covariance<Q: Borrow<DMatrix<f64>>>(
    ch: &ChannelInstance,
    rx: usize,
    set: &[usize],
    q: &[Q],
    n: usize,
) -> Result<DMatrix<f64>, ModelError> {
    let d = 2 * n;
    let mut acc = DMatrix::identity(d, d) * ch.lifted_noise();
    for &l in set {
        let s = ch.extended(rx, l, n)?.entries;
        let ql: &DMatrix<f64> = q[l].borrow();
        if ql.nrows() != d {
            return Err(ModelError::InvalidArgument(format!(
                "covariance of user {l} has size {} but extension needs {d}",
                ql.nrows()
            )));
        }
        acc += &s * ql * s.transpose();
    }
    Ok(acc)
}

/// Per-user rates in bits per channel use for lifted covariances under
/// successive decoding at the base station along `order`.
pub fn vector_rates<Q: Borrow<DMatrix<f64>>>(
    ch: &ChannelInstance,
    q: &[Q],
    n: usize,
    order: &[usize],
) -> Result<Vec<f64>, ModelError> {
    if n == 0 {
        return Err(ModelError::InvalidArgument("extension length must be ≥ 1".into()));
    }
    if q.len() != ch.users() {
        return Err(ModelError::InvalidArgument("need one covariance per user".into()));
    }
    ch.require_noise()?;
    let sets = decoding_sets(ch.users(), order)?;
    let mut rates = vec![0.0; ch.users()];
    for s in &sets {
        let plus = received_covariance(ch, s.receiver, &s.signal, q, n)?;
        let minus = received_covariance(ch, s.receiver, &s.interference, q, n)?;
        let (a, b) = match (logdet_pd(&plus), logdet_pd(&minus)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(ModelError::Degenerate("singular received covariance".into())),
        };
        rates[s.user] = ((a - b) / (2.0 * n as f64 * std::f64::consts::LN_2)).max(0.0);
    }
    Ok(rates)
}
