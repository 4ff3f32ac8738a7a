//! Rate oracles consumed by the schedulers.
//!
//! [`GramRateOracle`] evaluates the MMSE/ZF sum-rate bound of any user subset
//! from precomputed `K × K` Gram matrices, so a candidate evaluation costs
//! `O(n³)` in the subset size and nothing in the AP count. Interference from
//! other clusters enters as a fixed `K × K` covariance restricted to the
//! subset.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_in_place, gather_principal, inverse_from_cholesky, transpose_gram, CMatrix, C64,
};
use crate::precoding::PrecoderKind;

/// Anything that can score a user subset of a fixed scheduling scope.
pub trait RateOracle {
    /// Number of users `K` in scope; subsets index `0..K`.
    fn user_count(&self) -> usize;

    /// `g_kᴴ g_k` of the channel estimate.
    fn channel_power(&self, k: usize) -> f64;

    /// Sum-rate of `users`, or `None` when no precoder exists for the subset.
    fn rate(&self, users: &[usize]) -> Option<f64>;

    /// Rates of `base ∪ {k}` for every candidate `k`.
    fn extension_rates(&self, base: &[usize], candidates: &[usize]) -> Vec<Option<f64>> {
        let mut set = base.to_vec();
        set.push(0);
        candidates
            .iter()
            .map(|&k| {
                *set.last_mut().unwrap() = k;
                self.rate(&set)
            })
            .collect()
    }
}

/// Cross term between the estimation error and the estimate.
#[derive(Debug, Clone)]
enum ErrorGram {
    /// `G̃ = r·Ĝ`.
    Proportional(f64),
    /// `G̃ᵀ·conj(Ĝ)`.
    Full(CMatrix),
}

/// Gram matrices of one scheduling scope (a cluster or the whole network).
#[derive(Debug, Clone)]
pub struct ChannelGrams {
    gram: CMatrix,
    error: ErrorGram,
    ap_count: usize,
}

impl ChannelGrams {
    /// `g_hat` and `g_tilde` are `M × K` over the scope's APs and users.
    pub fn new(g_hat: &CMatrix, g_tilde: &CMatrix) -> Result<Self> {
        if g_hat.shape() != g_tilde.shape() {
            return Err(Error::Usage("estimate and error matrices differ in shape".into()));
        }
        let gram = transpose_gram(g_hat, g_hat);
        let hat_norm = g_hat.norm();
        let r = if hat_norm > 0.0 { g_tilde.norm() / hat_norm } else { 0.0 };
        let residual = (g_tilde - g_hat * C64::new(r, 0.0)).norm();
        let error = if residual <= 1e-12 * g_tilde.norm().max(f64::MIN_POSITIVE) || g_tilde.norm() == 0.0 {
            ErrorGram::Proportional(r)
        } else {
            ErrorGram::Full(transpose_gram(g_tilde, g_hat))
        };
        Ok(Self {
            gram,
            error,
            ap_count: g_hat.nrows(),
        })
    }

    pub fn user_count(&self) -> usize {
        self.gram.nrows()
    }

    /// `Ĝᵀ·conj(Ĝ)`.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }
}

/// Link budget and precoder design shared by all subsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub rho_f: f64,
    pub sigma_w2: f64,
    pub p_total: f64,
    pub precoder: PrecoderKind,
}

impl RateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_f > 0.0) || !(self.sigma_w2 > 0.0) || !(self.p_total > 0.0) {
            return Err(Error::Config(format!("rate parameters must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Default)]
struct Scratch {
    gamma: Vec<C64>,
    q: Vec<C64>,
    base: Vec<C64>,
    u: Vec<C64>,
    set: Vec<usize>,
    t: Vec<C64>,
    sig: Vec<C64>,
    err: Vec<C64>,
}

/// Equal-power MMSE/ZF sum-rate evaluated from Gram matrices.
pub struct GramRateOracle<'a> {
    grams: &'a ChannelGrams,
    interference: Option<&'a CMatrix>,
    params: RateParams,
    scratch: RefCell<Scratch>,
}

impl<'a> GramRateOracle<'a> {
    pub fn new(grams: &'a ChannelGrams, params: RateParams) -> Self {
        Self {
            grams,
            interference: None,
            params,
            scratch: RefCell::new(Scratch::default()),
        }
    }

    /// Adds a fixed `K × K` interference covariance (already scaled by `ρ`).
    pub fn with_interference(mut self, interference: &'a CMatrix) -> Self {
        assert_eq!(interference.nrows(), self.grams.user_count());
        self.interference = Some(interference);
        self
    }

    pub fn params(&self) -> RateParams {
        self.params
    }

    /// Regularizer of the weights for `l` users.
    fn reg(&self, l: usize) -> f64 {
        match self.params.precoder {
            PrecoderKind::Mmse => l as f64 * self.params.sigma_w2 / self.params.rho_f,
            PrecoderKind::Zf => 0.0,
        }
    }

    fn feasible(&self, l: usize) -> bool {
        self.params.precoder != PrecoderKind::Zf || l <= self.grams.ap_count
    }

    /// `out = (Γ_S + reg·I)⁻¹`.
    fn regularized_inverse(&self, users: &[usize], reg: f64, work: &mut Vec<C64>, out: &mut Vec<C64>) -> Option<()> {
        let l = users.len();
        gather_principal(&self.grams.gram, users, work);
        for i in 0..l {
            work[i * l + i] += reg;
        }
        cholesky_in_place(work, l)?;
        out.clear();
        out.resize(l * l, C64::new(0.0, 0.0));
        inverse_from_cholesky(work, l, out);
        Some(())
    }

    /// Rate of `users` given `q = (Γ_S + reg·I)⁻¹`.
    ///
    /// With `F = Γ_S·Q = I − reg·Q`, the effective channel of the normalized
    /// weights is `F·D` and the weight column norms are
    /// `diag(Q·Γ_S·Q) = diag(Q) − reg·diag(Q²)`.
    #[allow(clippy::too_many_arguments)]
    fn rate_from_inverse(
        &self,
        users: &[usize],
        q: &[C64],
        work: &mut Vec<C64>,
        t: &mut Vec<C64>,
        sig: &mut Vec<C64>,
        err: &mut Vec<C64>,
    ) -> Option<f64> {
        let l = users.len();
        let RateParams { rho_f, sigma_w2, p_total, .. } = self.params;
        let reg = self.reg(l);
        let amp = (p_total / l as f64).sqrt();
        let mut scale = vec![0.0; l];
        for (i, sc) in scale.iter_mut().enumerate() {
            let col = &q[i * l..(i + 1) * l];
            let nrm = col[i].re - reg * col.iter().map(|v| v.norm_sqr()).sum::<f64>();
            if nrm > 1e-300 && nrm.is_finite() {
                *sc = amp / nrm.sqrt();
            }
        }
        t.clear();
        t.extend(q.iter().map(|v| -v * reg));
        for (i, sc) in scale.iter().enumerate() {
            t[i * l + i] += 1.0;
            t[i * l..(i + 1) * l].iter_mut().for_each(|v| *v *= sc);
        }
        outer_hermitian(t, l, rho_f, sig);

        match &self.grams.error {
            ErrorGram::Proportional(r) => {
                err.clear();
                err.extend(sig.iter().map(|v| v * (r * r)));
            }
            ErrorGram::Full(xi) => {
                gather_principal(xi, users, work);
                mul(work, q, l, t);
                for (i, sc) in scale.iter().enumerate() {
                    t[i * l..(i + 1) * l].iter_mut().for_each(|v| *v *= sc);
                }
                outer_hermitian(t, l, rho_f, err);
            }
        }
        if let Some(j) = self.interference {
            for (cj, &uj) in users.iter().enumerate() {
                for (ci, &ui) in users.iter().enumerate() {
                    err[cj * l + ci] += j[(ui, uj)];
                }
            }
        }
        for i in 0..l {
            err[i * l + i] += sigma_w2;
        }
        for (a, b) in sig.iter_mut().zip(err.iter()) {
            *a += b;
        }
        let num = cholesky_in_place(sig, l)?;
        let den = cholesky_in_place(err, l)?;
        let r = (num - den) / LN_2;
        r.is_finite().then_some(r.max(0.0))
    }
}

/// `out = a · b` for `n × n` column-major buffers.
fn mul(a: &[C64], b: &[C64], n: usize, out: &mut Vec<C64>) {
    out.clear();
    out.resize(n * n, C64::new(0.0, 0.0));
    for j in 0..n {
        let col = &mut out[j * n..(j + 1) * n];
        for k in 0..n {
            let bkj = b[j * n + k];
            let a_col = &a[k * n..(k + 1) * n];
            for (o, a) in col.iter_mut().zip(a_col) {
                *o += a * bkj;
            }
        }
    }
}

/// `out = ρ · t · tᴴ` (full Hermitian matrix).
fn outer_hermitian(t: &[C64], n: usize, rho: f64, out: &mut Vec<C64>) {
    out.clear();
    out.resize(n * n, C64::new(0.0, 0.0));
    // out[:, j] = Σ_k t[:, k] · conj(t[j, k])
    for j in 0..n {
        for k in 0..n {
            let c = t[k * n + j].conj() * rho;
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let (src, dst) = (&t[k * n..(k + 1) * n], j * n);
            for i in j..n {
                out[dst + i] += src[i] * c;
            }
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            out[i * n + j] = out[j * n + i].conj();
        }
    }
}

impl RateOracle for GramRateOracle<'_> {
    fn user_count(&self) -> usize {
        self.grams.user_count()
    }

    fn channel_power(&self, k: usize) -> f64 {
        self.grams.gram[(k, k)].re
    }

    fn rate(&self, users: &[usize]) -> Option<f64> {
        let l = users.len();
        if l == 0 {
            return Some(0.0);
        }
        if !self.feasible(l) {
            return None;
        }
        let mut s = self.scratch.borrow_mut();
        let Scratch { gamma, q, t, sig, err, .. } = &mut *s;
        self.regularized_inverse(users, self.reg(l), gamma, q)?;
        self.rate_from_inverse(users, q, gamma, t, sig, err)
    }

    /// Shares one factorization of the base set across all candidates: the
    /// inverse for `base ∪ {k}` follows from the base inverse by a bordered
    /// (Schur complement) update.
    fn extension_rates(&self, base: &[usize], candidates: &[usize]) -> Vec<Option<f64>> {
        let b = base.len();
        let l = b + 1;
        if !self.feasible(l) {
            return vec![None; candidates.len()];
        }
        if b == 0 {
            return candidates.iter().map(|&k| self.rate(&[k])).collect();
        }
        let reg = self.reg(l);
        let mut s = self.scratch.borrow_mut();
        let Scratch { gamma, q, base: qb, u, set, t, sig, err } = &mut *s;
        if self.regularized_inverse(base, reg, gamma, qb).is_none() {
            drop(s);
            return candidates
                .iter()
                .map(|&k| {
                    let mut full = base.to_vec();
                    full.push(k);
                    self.rate(&full)
                })
                .collect();
        }
        let g = &self.grams.gram;
        set.clear();
        set.extend_from_slice(base);
        set.push(0);
        candidates
            .iter()
            .map(|&k| {
                // u = Q_U·γ_k with γ_k the Gram column of k over the base.
                u.clear();
                u.resize(b, C64::new(0.0, 0.0));
                for (j, &uj) in base.iter().enumerate() {
                    let gk = g[(uj, k)];
                    for (ui, qv) in u.iter_mut().zip(&qb[j * b..(j + 1) * b]) {
                        *ui += qv * gk;
                    }
                }
                let dot: f64 = base.iter().zip(u.iter()).map(|(&uj, ui)| (g[(uj, k)].conj() * ui).re).sum();
                let diag = g[(k, k)].re + reg;
                let schur = diag - dot;
                if !(schur > 1e-12 * diag) {
                    return None;
                }
                let inv = 1.0 / schur;
                q.clear();
                q.resize(l * l, C64::new(0.0, 0.0));
                for j in 0..b {
                    let cj = u[j].conj() * inv;
                    for i in 0..b {
                        q[j * l + i] = qb[j * b + i] + u[i] * cj;
                    }
                    q[j * l + b] = -cj;
                    q[b * l + j] = -u[j] * inv;
                }
                q[b * l + b] = C64::new(inv, 0.0);
                set[b] = k;
                self.rate_from_inverse(set, q, gamma, t, sig, err)
            })
            .collect()
    }
}

/// Oracle backed by an arbitrary closure; mostly useful in tests.
pub struct FnOracle<F: Fn(&[usize]) -> Option<f64>> {
    pub powers: Vec<f64>,
    pub f: F,
}

impl<F: Fn(&[usize]) -> Option<f64>> RateOracle for FnOracle<F> {
    fn user_count(&self) -> usize {
        self.powers.len()
    }

    fn channel_power(&self, k: usize) -> f64 {
        self.powers[k]
    }

    fn rate(&self, users: &[usize]) -> Option<f64> {
        (self.f)(users)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, split_csi, subchannel};
    use crate::precoding::equal_power_precoder;
    use crate::rate::{cf_rate, log2_det_ratio};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn setup(m: usize, k: usize, seed: u64, gamma: f64) -> crate::channel::ChannelRealization {
        let beta = DMatrix::from_fn(m, k, |i, j| 0.2 + ((i * 7 + j * 3) % 5) as f64 * 0.4);
        split_csi(&draw_channel(&beta, seed), gamma).unwrap()
    }

    fn direct_rate(
        real: &crate::channel::ChannelRealization,
        users: &[usize],
        params: RateParams,
    ) -> f64 {
        let aps: Vec<usize> = (0..real.g.nrows()).collect();
        let gh = subchannel(&real.g_hat, &aps, users).unwrap();
        let gt = subchannel(&real.g_tilde, &aps, users).unwrap();
        let p = equal_power_precoder(params.precoder, &gh, params.rho_f, params.sigma_w2, params.p_total)
            .unwrap()
            .matrix;
        cf_rate(&gh, &gt, &p, params.rho_f, params.sigma_w2).unwrap()
    }

    #[test]
    fn gram_route_matches_direct_equations() {
        for (seed, kind) in [(1, PrecoderKind::Mmse), (2, PrecoderKind::Zf), (3, PrecoderKind::Mmse)] {
            let real = setup(8, 10, seed, 0.95f64.sqrt());
            let grams = ChannelGrams::new(&real.g_hat, &real.g_tilde).unwrap();
            assert!(matches!(grams.error, ErrorGram::Proportional(_)));
            let params = RateParams { rho_f: 6.0, sigma_w2: 1.0, p_total: 1.0, precoder: kind };
            let oracle = GramRateOracle::new(&grams, params);
            for users in [vec![3], vec![0, 4], vec![9, 2, 5, 7], vec![1, 2, 3, 4, 5, 6]] {
                let a = oracle.rate(&users).unwrap();
                let b = direct_rate(&real, &users, params);
                assert_relative_eq!(a, b, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn general_error_model_matches_direct_equations() {
        let real = setup(6, 7, 9, 0.9);
        let other = draw_channel(&DMatrix::from_element(6, 7, 0.1), 77);
        let real = crate::channel::ChannelRealization { g_tilde: other, ..real };
        let grams = ChannelGrams::new(&real.g_hat, &real.g_tilde).unwrap();
        assert!(matches!(grams.error, ErrorGram::Full(_)));
        let params = RateParams { rho_f: 3.0, sigma_w2: 0.5, p_total: 2.0, precoder: PrecoderKind::Mmse };
        let oracle = GramRateOracle::new(&grams, params);
        for users in [vec![0, 1, 2], vec![6, 3]] {
            assert_relative_eq!(oracle.rate(&users).unwrap(), direct_rate(&real, &users, params), max_relative = 1e-9);
        }
    }

    #[test]
    fn interference_term_matches_direct_equations() {
        let real = setup(5, 6, 4, 0.95f64.sqrt());
        let grams = ChannelGrams::new(&real.g_hat, &real.g_tilde).unwrap();
        let params = RateParams { rho_f: 10.0, sigma_w2: 1.0, p_total: 1.0, precoder: PrecoderKind::Mmse };
        let x = draw_channel(&DMatrix::from_element(6, 3, 0.3), 5);
        let j = &x * x.adjoint();
        let oracle = GramRateOracle::new(&grams, params).with_interference(&j);
        let users = [4, 1, 2];
        let aps: Vec<usize> = (0..5).collect();
        let gh = subchannel(&real.g_hat, &aps, &users).unwrap();
        let gt = subchannel(&real.g_tilde, &aps, &users).unwrap();
        let p = equal_power_precoder(PrecoderKind::Mmse, &gh, 10.0, 1.0, 1.0).unwrap().matrix;
        let js = CMatrix::from_fn(3, 3, |a, b| j[(users[a], users[b])]);
        let b = crate::rate::cf_error_covariance(&gt, &p, 10.0, 1.0).unwrap() + js;
        let s = crate::linalg::induced_covariance(&gh, &p) * C64::new(10.0, 0.0);
        let expected = log2_det_ratio(&s, &b).unwrap();
        assert_relative_eq!(oracle.rate(&users).unwrap(), expected, max_relative = 1e-9);
    }

    #[test]
    fn bordered_extensions_match_fresh_evaluations() {
        let real = setup(6, 12, 21, 0.95f64.sqrt());
        let grams = ChannelGrams::new(&real.g_hat, &real.g_tilde).unwrap();
        let x = draw_channel(&DMatrix::from_element(12, 2, 0.2), 8);
        let j = &x * x.adjoint();
        for kind in [PrecoderKind::Mmse, PrecoderKind::Zf] {
            let params = RateParams { rho_f: 4.0, sigma_w2: 1.0, p_total: 1.0, precoder: kind };
            let plain = GramRateOracle::new(&grams, params);
            let loaded = GramRateOracle::new(&grams, params).with_interference(&j);
            for o in [&plain, &loaded] {
                for base in [vec![], vec![5], vec![2, 9, 0], vec![1, 3, 4, 6, 7]] {
                    let cands: Vec<usize> = (0..12).filter(|k| !base.contains(k)).collect();
                    let fast = o.extension_rates(&base, &cands);
                    for (&k, f) in cands.iter().zip(fast) {
                        let mut set = base.clone();
                        set.push(k);
                        match (f, o.rate(&set)) {
                            (Some(a), Some(b)) => assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12),
                            (a, b) => assert_eq!(a, b, "{kind:?} {set:?}"),
                        }
                    }
                }
            }
            // Six users on six APs is the largest ZF set.
            let all: Vec<usize> = (0..6).collect();
            assert!(plain.extension_rates(&all, &[7]).iter().all(|r| r.is_none() == (kind == PrecoderKind::Zf)));
        }
    }

    #[test]
    fn zf_infeasible_subset_is_none() {
        let real = setup(2, 5, 1, 1.0);
        let grams = ChannelGrams::new(&real.g_hat, &real.g_tilde).unwrap();
        let params = RateParams { rho_f: 1.0, sigma_w2: 1.0, p_total: 1.0, precoder: PrecoderKind::Zf };
        let oracle = GramRateOracle::new(&grams, params);
        assert!(oracle.rate(&[0, 1, 2]).is_none());
        assert!(oracle.rate(&[0, 1]).is_some());
    }

    #[test]
    fn powers_come_from_the_estimate() {
        let real = setup(4, 3, 2, 0.8);
        let grams = ChannelGrams::new(&real.g_hat, &real.g_tilde).unwrap();
        let params = RateParams { rho_f: 1.0, sigma_w2: 1.0, p_total: 1.0, precoder: PrecoderKind::Mmse };
        let oracle = GramRateOracle::new(&grams, params);
        for k in 0..3 {
            assert_relative_eq!(oracle.channel_power(k), real.g_hat.column(k).norm_squared(), max_relative = 1e-12);
        }
    }
}
