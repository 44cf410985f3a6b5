//! Secular (weak-coupling) Lindblad generators built from a system Hamiltonian
//! `H_s`, Hermitian couplings `X^i` and bath spectral matrices `gamma(w)`,
//! `sigma(w)` tabulated at the Bohr frequencies of `H_s`.
//!
//! A Bohr frequency `w = e_m - e_n` labels the spectral component
//! `X~(w) = sum |n><n| X |m><m|`, which lowers the energy by `w`, so positive
//! frequencies are emission into the bath. The resulting generator is
//!
//! ```text
//! H = H_s + sum_{w,ij} sigma^{ij}(w) X~^i(w)^dagger X~^j(w)
//! D(rho) = sum_{w,ij} gamma^{ij}(w) ( X~^j rho X~^i^dagger - 1/2 {X~^i^dagger X~^j, rho} )
//! ```
//!
//! and is returned in diagonal form.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::liouvillian::LindbladModel;
use crate::ops::{
    commutator, dagger, eigh, expm, hermiticity_defect, max_abs, max_abs_diff, r, zeros, CMatrix, DensityMatrix,
    Hermitian, C64,
};

/// Positivity threshold on the eigenvalues of `gamma(w)`.
pub const GAMMA_POSITIVITY_TOL: f64 = 1e-8;
/// Relative cut below which dissipator eigenvalues are dropped.
pub const DROP_REL_TOL: f64 = 1e-12;

/// Hermitian system operators `X^i` of the coupling `V = sum_i X^i (x) Y^i`.
#[derive(Debug, Clone)]
pub struct CouplingSet {
    ops: Vec<Hermitian>,
    labels: Vec<String>,
}

impl CouplingSet {
    pub fn new(ops: Vec<Hermitian>, labels: Vec<String>) -> Result<Self> {
        if ops.len() != labels.len() {
            return Err(Error::InvalidArgument(format!("{} couplings but {} labels", ops.len(), labels.len())));
        }
        if let Some(first) = ops.first() {
            let n = first.dim();
            if let Some(bad) = ops.iter().position(|x| x.dim() != n) {
                return Err(Error::Dimension(format!("coupling {bad} has dim {}, expected {n}", ops[bad].dim())));
            }
        }
        Ok(Self { ops, labels })
    }

    /// Labels `X1, X2, ...`.
    pub fn unlabeled(ops: Vec<Hermitian>) -> Result<Self> {
        let labels = (1..=ops.len()).map(|i| format!("X{i}")).collect();
        Self::new(ops, labels)
    }

    pub fn ops(&self) -> &[Hermitian] {
        &self.ops
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Spectral decomposition of the couplings over the Bohr frequencies of `H_s`.
#[derive(Debug, Clone)]
pub struct BohrSpectrum {
    hamiltonian: Hermitian,
    couplings: CouplingSet,
    energies: Array1<f64>,
    eigvecs: CMatrix,
    frequencies: Vec<f64>,
    /// `jumps[k][i]` is `X~^i(frequencies[k])`
    jumps: Vec<Vec<CMatrix>>,
    freq_tol: f64,
}

impl BohrSpectrum {
    /// Ascending Bohr frequencies, closed under negation.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// `X~^i(w)` for every coupling `i` at the `k`-th frequency.
    pub fn jump_ops(&self, k: usize) -> &[CMatrix] {
        &self.jumps[k]
    }

    pub fn hamiltonian(&self) -> &Hermitian {
        &self.hamiltonian
    }

    pub fn couplings(&self) -> &CouplingSet {
        &self.couplings
    }

    /// Ascending eigenvalues of `H_s`.
    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    /// Column eigenvectors of `H_s`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigvecs
    }

    pub fn freq_tol(&self) -> f64 {
        self.freq_tol
    }

    /// Index of the frequency within `freq_tol` of `omega`.
    pub fn index_of(&self, omega: f64) -> Option<usize> {
        self.frequencies.iter().position(|&w| (w - omega).abs() <= self.freq_tol)
    }

    /// `max ||[H_s, X~(w)] + w X~(w)||` over all components.
    pub fn commutator_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (k, &w) in self.frequencies.iter().enumerate() {
            for x in &self.jumps[k] {
                let d = commutator(&self.hamiltonian, x) + x * r(w);
                worst = worst.max(max_abs(&d));
            }
        }
        worst
    }

    /// `max |sum_w X~^i(w) - X^i|` over couplings.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.hamiltonian.dim();
        let mut worst = 0.0_f64;
        for (i, x) in self.couplings.ops().iter().enumerate() {
            let mut sum = zeros(n);
            for per_freq in &self.jumps {
                sum += &per_freq[i];
            }
            worst = worst.max(max_abs_diff(&sum, x));
        }
        worst
    }

    /// `max |X~^i(-w) - X~^i(w)^dagger|`.
    pub fn negation_defect(&self) -> f64 {
        let m = self.frequencies.len();
        let mut worst = 0.0_f64;
        for k in 0..m {
            let mirror = m - 1 - k;
            for (a, b) in self.jumps[k].iter().zip(&self.jumps[mirror]) {
                worst = worst.max(max_abs_diff(a, &dagger(b)));
            }
        }
        worst
    }
}

/// Default clustering tolerance, `1e-8 * max |e_n|` (or `1e-8` for `H_s = 0`).
pub fn default_freq_tol(h: &Hermitian) -> Result<f64> {
    let e = eigh(h)?;
    let scale = e.values.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
    Ok(1e-8 * if scale > 0.0 { scale } else { 1.0 })
}

pub fn bohr_decompose(h: &Hermitian, couplings: &CouplingSet, freq_tol: f64) -> Result<BohrSpectrum> {
    if !(freq_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("freq_tol must be positive, got {freq_tol}")));
    }
    let n = h.dim();
    if let Some(x) = couplings.ops().first() {
        if x.dim() != n {
            return Err(Error::Dimension(format!("couplings have dim {}, Hamiltonian {n}", x.dim())));
        }
    }
    let eig = eigh(h)?;
    let energies = eig.values.clone();
    let v = eig.vectors;

    // cluster |e_m - e_n| by single linkage, then mirror
    let mut gaps: Vec<f64> = Vec::with_capacity(n * n + 1);
    gaps.push(0.0);
    for a in 0..n {
        for b in a + 1..n {
            gaps.push((energies[b] - energies[a]).abs());
        }
    }
    gaps.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for g in gaps {
        match clusters.last_mut() {
            Some(c) if g - c[c.len() - 1] <= freq_tol => c.push(g),
            _ => clusters.push(vec![g]),
        }
    }
    let positive: Vec<f64> = clusters
        .iter()
        .enumerate()
        .map(|(k, c)| if k == 0 { 0.0 } else { c.iter().sum::<f64>() / c.len() as f64 })
        .collect();
    let mut frequencies: Vec<f64> = positive.iter().skip(1).rev().map(|w| -w).collect();
    frequencies.extend(positive.iter().copied());

    let nearest = |w: f64| -> usize {
        let mut best = 0;
        for (k, f) in frequencies.iter().enumerate() {
            if (f - w).abs() < (frequencies[best] - w).abs() {
                best = k;
            }
        }
        best
    };
    // label[(n, m)] = frequency index of e_m - e_n
    let mut label = Array2::<usize>::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            label[(a, b)] = nearest(energies[b] - energies[a]);
        }
    }

    let vd = dagger(&v);
    let mut jumps = vec![Vec::with_capacity(couplings.len()); frequencies.len()];
    for x in couplings.ops() {
        let xe = vd.dot(x.matrix()).dot(&v);
        for (k, per_freq) in jumps.iter_mut().enumerate() {
            let masked =
                Array2::from_shape_fn(
                    (n, n),
                    |(a, b)| if label[(a, b)] == k { xe[(a, b)] } else { C64::new(0.0, 0.0) },
                );
            per_freq.push(v.dot(&masked).dot(&vd));
        }
    }
    Ok(BohrSpectrum {
        hamiltonian: h.clone(),
        couplings: couplings.clone(),
        energies,
        eigvecs: v,
        frequencies,
        jumps,
        freq_tol,
    })
}

/// `gamma(w)` and `sigma(w)` at one frequency.
#[derive(Debug, Clone)]
pub struct SpectralEntry {
    pub omega: f64,
    pub gamma: CMatrix,
    pub sigma: CMatrix,
}

/// Analytic bath families, diagonal in the coupling index and with `sigma = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathFamily {
    /// `gamma(w) = kappa` at every frequency.
    Flat { kappa: f64 },
    /// `gamma(w) = kappa` for emission and `kappa e^{-beta |w|}` for absorption.
    Thermal { kappa: f64, beta: f64 },
    /// Ohmic density `J(w) = kappa w e^{-w/cutoff}` with Bose factors:
    /// `gamma(w) = J(w)(1 + n(w))`, `gamma(-w) = J(w) n(w)`, `gamma(0) = kappa / beta`.
    Ohmic { kappa: f64, beta: f64, cutoff: f64 },
}

impl BathFamily {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            BathFamily::Flat { kappa } => kappa >= 0.0,
            BathFamily::Thermal { kappa, beta } => kappa >= 0.0 && beta >= 0.0,
            BathFamily::Ohmic { kappa, beta, cutoff } => kappa >= 0.0 && beta > 0.0 && cutoff > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Spec(format!("invalid bath parameters {self:?}")))
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match *self {
            BathFamily::Flat { .. } => None,
            BathFamily::Thermal { beta, .. } | BathFamily::Ohmic { beta, .. } => Some(beta),
        }
    }

    /// Scalar rate at frequency `w`.
    pub fn rate(&self, w: f64) -> f64 {
        match *self {
            BathFamily::Flat { kappa } => kappa,
            BathFamily::Thermal { kappa, beta } => kappa * (beta * w).min(0.0).exp(),
            BathFamily::Ohmic { kappa, beta, cutoff } => {
                let a = w.abs();
                if a == 0.0 {
                    return kappa / beta;
                }
                let j = kappa * a * (-a / cutoff).exp();
                let n = 1.0 / (beta * a).exp_m1();
                if w > 0.0 {
                    j * (1.0 + n)
                } else {
                    j * n
                }
            }
        }
    }
}

/// Bath spectral matrices tabulated per frequency.
#[derive(Debug, Clone)]
pub struct BathSpectralFunction {
    entries: Vec<SpectralEntry>,
    beta: Option<f64>,
    /// matching tolerance for frequency lookup
    tol: f64,
}

impl BathSpectralFunction {
    /// Checks shapes and Hermiticity; positivity of `gamma` is checked by
    /// [`build_secular_lindblad`].
    pub fn new(entries: Vec<SpectralEntry>, beta: Option<f64>, tol: f64) -> Result<Self> {
        let dim = entries.first().map(|e| e.gamma.nrows());
        for e in &entries {
            let d = dim.expect("non-empty");
            if e.gamma.dim() != (d, d) || e.sigma.dim() != (d, d) {
                return Err(Error::Dimension(format!("spectral matrices at w={} are not {d}x{d}", e.omega)));
            }
            for (name, m) in [("gamma", &e.gamma), ("sigma", &e.sigma)] {
                if hermiticity_defect(m) > 1e-12 * max_abs(m).max(1.0) {
                    return Err(Error::NotHermitian { deviation: hermiticity_defect(m) });
                }
                if m.iter().any(|z| !z.is_finite()) {
                    return Err(Error::Numeric(format!("non-finite {name} at w={}", e.omega)));
                }
            }
        }
        if let Some(b) = beta {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::Spec(format!("beta must be finite and non-negative, got {b}")));
            }
        }
        Ok(Self { entries, beta, tol })
    }

    /// Evaluates a family at every frequency of `spectrum`.
    pub fn from_family(family: &BathFamily, spectrum: &BohrSpectrum) -> Result<Self> {
        family.validate()?;
        let n = spectrum.couplings().len();
        let entries = spectrum
            .frequencies()
            .iter()
            .map(|&w| {
                let g = family.rate(w);
                SpectralEntry {
                    omega: w,
                    gamma: Array2::from_shape_fn((n, n), |(i, j)| if i == j { r(g) } else { r(0.0) }),
                    sigma: Array2::zeros((n, n)),
                }
            })
            .collect();
        Self::new(entries, family.beta(), spectrum.freq_tol())
    }

    pub fn entries(&self) -> &[SpectralEntry] {
        &self.entries
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn lookup(&self, omega: f64) -> Option<&SpectralEntry> {
        self.entries.iter().find(|e| (e.omega - omega).abs() <= self.tol)
    }

    fn require(&self, omega: f64) -> Result<&SpectralEntry> {
        self.lookup(omega).ok_or_else(|| Error::Spec(format!("bath has no entry for frequency {omega}")))
    }
}

/// `sum_{w,ij} sigma^{ij}(w) X~^i(w)^dagger X~^j(w)`.
pub fn lamb_shift(spectrum: &BohrSpectrum, bath: &BathSpectralFunction) -> Result<CMatrix> {
    let n = spectrum.hamiltonian().dim();
    let mut delta = zeros(n);
    for (k, &w) in spectrum.frequencies().iter().enumerate() {
        let entry = bath.require(w)?;
        check_coupling_dim(entry, spectrum)?;
        let xs = spectrum.jump_ops(k);
        for (i, xi) in xs.iter().enumerate() {
            let xid = dagger(xi);
            for (j, xj) in xs.iter().enumerate() {
                let s = entry.sigma[(i, j)];
                if s != C64::new(0.0, 0.0) {
                    delta = delta + xid.dot(xj) * s;
                }
            }
        }
    }
    Ok(delta)
}

fn check_coupling_dim(entry: &SpectralEntry, spectrum: &BohrSpectrum) -> Result<()> {
    let c = spectrum.couplings().len();
    if entry.gamma.nrows() != c {
        return Err(Error::Dimension(format!(
            "bath matrices are {0}x{0} but there are {c} couplings",
            entry.gamma.nrows()
        )));
    }
    Ok(())
}

/// Secular generator in diagonal form with the Lamb shift folded into `H`.
pub fn build_secular_lindblad(spectrum: &BohrSpectrum, bath: &BathSpectralFunction) -> Result<LindbladModel> {
    let delta = lamb_shift(spectrum, bath)?;
    let h = Hermitian::from_hermitian_part(&(spectrum.hamiltonian().matrix() + &delta));

    let mut diagonalized = Vec::with_capacity(spectrum.frequencies().len());
    let mut max_lambda = 0.0_f64;
    for &w in spectrum.frequencies() {
        let entry = bath.require(w)?;
        check_coupling_dim(entry, spectrum)?;
        if entry.gamma.is_empty() {
            diagonalized.push(None);
            continue;
        }
        let e = eigh(&entry.gamma)?;
        if e.values[0] < -GAMMA_POSITIVITY_TOL {
            return Err(Error::Positivity(format!("gamma({w}) has eigenvalue {:.3e}", e.values[0])));
        }
        max_lambda = max_lambda.max(e.values[e.values.len() - 1]);
        diagonalized.push(Some(e));
    }

    let mut jumps = Vec::new();
    for (k, e) in diagonalized.iter().enumerate() {
        let Some(e) = e else { continue };
        let xs = spectrum.jump_ops(k);
        for (c, &lambda) in e.values.iter().enumerate() {
            if lambda <= DROP_REL_TOL * max_lambda || lambda <= 0.0 {
                continue;
            }
            let mut l = zeros(spectrum.hamiltonian().dim());
            for (i, xi) in xs.iter().enumerate() {
                l = l + xi * e.vectors[(i, c)].conj();
            }
            let l = l * r(lambda.sqrt());
            if max_abs(&l) > 1e-14 {
                jumps.push(l);
            }
        }
    }
    LindbladModel::new(h, jumps)
}

/// Per-frequency detailed-balance residuals.
#[derive(Debug, Clone)]
pub struct DetailedBalanceReport {
    /// `(w, max_ij |gamma^{ij}(w) e^{-beta w} - gamma^{ji}(-w)|)`
    pub residuals: Vec<(f64, f64)>,
    pub max_residual: f64,
    pub pass: bool,
}

pub fn check_detailed_balance(bath: &BathSpectralFunction, beta: f64, tol: f64) -> Result<DetailedBalanceReport> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
    }
    let mut residuals = Vec::with_capacity(bath.entries().len());
    for e in bath.entries() {
        let partner = bath
            .lookup(-e.omega)
            .ok_or_else(|| Error::Spec(format!("frequency {} has no partner at {}", e.omega, -e.omega)))?;
        let f = (-beta * e.omega).exp();
        let d = e.gamma.nrows();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((e.gamma[(i, j)] * f - partner.gamma[(j, i)]).norm());
            }
        }
        residuals.push((e.omega, worst));
    }
    let max_residual = residuals.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(DetailedBalanceReport { residuals, max_residual, pass: max_residual <= tol })
}

/// Rate equation for populations in the eigenbasis of `H_s`.
#[derive(Debug, Clone)]
pub struct PauliMasterModel {
    /// `rates[(k, n)] = W_{k -> n}`, zero diagonal.
    pub rates: Array2<f64>,
    /// `M[(n, k)] = W_{k -> n}`, `M[(k, k)] = -sum_n W_{k -> n}`.
    pub generator: Array2<f64>,
    /// Ascending eigenvalues of `H_s`.
    pub energies: Vec<f64>,
}

impl PauliMasterModel {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `max_k |sum_n M[(n, k)]|`.
    pub fn column_sum_defect(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|k| (0..n).map(|i| self.generator[(i, k)]).sum::<f64>().abs()).fold(0.0, f64::max)
    }

    /// Probability vector spanning the null space of `M`, assuming it is one-dimensional.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut a = Array2::from_shape_fn((n, n), |(i, j)| r(self.generator[(i, j)]));
        let mut b = ndarray::Array1::zeros(n);
        for j in 0..n {
            a[(n - 1, j)] = r(1.0);
        }
        b[n - 1] = r(1.0);
        let p = crate::ops::solve_vector(&a, &b)?;
        Ok(p.iter().map(|z| z.re).collect())
    }
}

pub fn extract_pauli_model(
    spectrum: &BohrSpectrum,
    bath: &BathSpectralFunction,
    h: &Hermitian,
) -> Result<PauliMasterModel> {
    if max_abs_diff(h, spectrum.hamiltonian()) > 1e-12 * max_abs(h).max(1.0) {
        return Err(Error::InvalidArgument("Hamiltonian differs from the one used for the spectrum".into()));
    }
    let e = spectrum.energies();
    let n = e.len();
    for k in 1..n {
        if e[k] - e[k - 1] <= spectrum.freq_tol() {
            return Err(Error::Degenerate(format!(
                "levels {} and {k} are {:.3e} apart; populations do not decouple",
                k - 1,
                e[k] - e[k - 1]
            )));
        }
    }
    let v = spectrum.eigenvectors();
    let vd = dagger(v);
    let xs: Vec<CMatrix> = spectrum.couplings().ops().iter().map(|x| vd.dot(x.matrix()).dot(v)).collect();
    let mut rates = Array2::<f64>::zeros((n, n));
    for k in 0..n {
        for m in 0..n {
            if k == m {
                continue;
            }
            let entry = bath.require(e[k] - e[m])?;
            check_coupling_dim(entry, spectrum)?;
            let mut w = C64::new(0.0, 0.0);
            for (i, xi) in xs.iter().enumerate() {
                for (j, xj) in xs.iter().enumerate() {
                    w += entry.gamma[(i, j)] * xi[(k, m)] * xj[(m, k)];
                }
            }
            rates[(k, m)] = w.re.max(0.0);
        }
    }
    let mut generator = Array2::<f64>::zeros((n, n));
    for k in 0..n {
        for m in 0..n {
            if k != m {
                generator[(m, k)] = rates[(k, m)];
                generator[(k, k)] -= rates[(k, m)];
            }
        }
    }
    Ok(PauliMasterModel { rates, generator, energies: e.to_vec() })
}

/// `p(t) = exp(t M) p0`.
pub fn evolve_pauli(model: &PauliMasterModel, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = model.dim();
    if p0.len() != n {
        return Err(Error::Dimension(format!("p0 has {} entries, model has {n} levels", p0.len())));
    }
    if p0.iter().any(|&p| !(p >= 0.0)) || (p0.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState("p0 must be a probability vector".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be non-negative, got {t}")));
    }
    let m = model.generator.mapv(r);
    let e = expm(&m, t)?;
    let p = ndarray::Array1::from_iter(p0.iter().map(|&x| r(x)));
    Ok(e.dot(&p).iter().map(|z| z.re).collect())
}

/// `exp(-beta H) / Z`.
pub fn gibbs_state(h: &Hermitian, beta: f64) -> Result<DensityMatrix> {
    let e = eigh(h)?;
    let shift = e.values[0];
    let z: f64 = e.values.iter().map(|&x| (-beta * (x - shift)).exp()).sum();
    DensityMatrix::new(e.map(|x| r((-beta * (x - shift)).exp() / z)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{propagate, Method};
    use crate::ops::{diag_real, ket_bra, sigma_minus, sigma_plus, sigma_x};
    use crate::random::{random_hermitian, rng};

    fn qubit(omega0: f64) -> (Hermitian, CouplingSet) {
        let h = Hermitian::new(diag_real(&[0.0, omega0])).unwrap();
        let x = CouplingSet::unlabeled(vec![Hermitian::new(sigma_x()).unwrap()]).unwrap();
        (h, x)
    }

    fn scalar_bath(spec: &BohrSpectrum, rate: impl Fn(f64) -> f64, beta: Option<f64>) -> BathSpectralFunction {
        let entries = spec
            .frequencies()
            .iter()
            .map(|&w| SpectralEntry { omega: w, gamma: diag_real(&[rate(w)]), sigma: zeros(1) })
            .collect();
        BathSpectralFunction::new(entries, beta, 1e-9).unwrap()
    }

    #[test]
    fn qubit_bohr_spectrum() {
        let (h, x) = qubit(1.0);
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        assert_eq!(spec.frequencies(), &[-1.0, 0.0, 1.0]);
        assert!(max_abs_diff(&spec.jump_ops(2)[0], &ket_bra(2, 0, 1)) < 1e-15);
        assert!(max_abs_diff(&spec.jump_ops(0)[0], &ket_bra(2, 1, 0)) < 1e-15);
        assert!(max_abs(&spec.jump_ops(1)[0]) < 1e-15);
    }

    #[test]
    fn diagonal_coupling_has_only_zero_frequency_content() {
        let h = Hermitian::new(diag_real(&[0.0, 0.7, 2.0])).unwrap();
        let x = CouplingSet::unlabeled(vec![h.clone()]).unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let zero = spec.index_of(0.0).unwrap();
        assert!(max_abs_diff(&spec.jump_ops(zero)[0], &h) < 1e-14);
        for k in (0..spec.frequencies().len()).filter(|&k| k != zero) {
            assert!(max_abs(&spec.jump_ops(k)[0]) < 1e-14);
        }
    }

    #[test]
    fn random_spectrum_invariants() {
        let mut g = rng(31);
        for n in [2, 3, 4] {
            let h = Hermitian::from_hermitian_part(&random_hermitian(&mut g, n, 1.0));
            let x = CouplingSet::unlabeled(vec![
                Hermitian::from_hermitian_part(&random_hermitian(&mut g, n, 1.0)),
                Hermitian::from_hermitian_part(&random_hermitian(&mut g, n, 1.0)),
            ])
            .unwrap();
            let spec = bohr_decompose(&h, &x, default_freq_tol(&h).unwrap()).unwrap();
            assert!(spec.completeness_defect() < 1e-10);
            assert!(spec.commutator_defect() < 1e-9);
            assert!(spec.negation_defect() < 1e-12);
        }
    }

    #[test]
    fn degenerate_levels_share_frequencies() {
        let h = Hermitian::new(diag_real(&[0.0, 1.0, 2.0, 2.0 + 1e-12])).unwrap();
        let x = CouplingSet::unlabeled(vec![Hermitian::new(crate::ops::identity(4)).unwrap()]).unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        assert_eq!(spec.frequencies().len(), 5);
    }

    #[test]
    fn thermal_qubit_jumps() {
        let (h, x) = qubit(1.0);
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let (down, up) = (0.8, 0.3);
        let bath = scalar_bath(
            &spec,
            |w| {
                if w > 0.0 {
                    down
                } else if w < 0.0 {
                    up
                } else {
                    0.0
                }
            },
            None,
        );
        let m = build_secular_lindblad(&spec, &bath).unwrap();
        assert_eq!(m.jumps().len(), 2);
        let expect = [sigma_plus() * r(up.sqrt()), sigma_minus() * r(down.sqrt())];
        for e in &expect {
            assert!(m.jumps().iter().any(|l| max_abs_diff(l, e) < 1e-14));
        }
        assert!(max_abs_diff(m.hamiltonian(), &h) < 1e-15);
    }

    #[test]
    fn zero_bath_is_unitary() {
        let (h, x) = qubit(1.0);
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let m = build_secular_lindblad(&spec, &scalar_bath(&spec, |_| 0.0, None)).unwrap();
        assert!(m.jumps().is_empty());
    }

    #[test]
    fn rank_one_gamma_gives_one_jump() {
        let (h, _) = qubit(1.0);
        let sx = Hermitian::new(sigma_x()).unwrap();
        let x = CouplingSet::unlabeled(vec![sx.clone(), sx]).unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let ones = Array2::from_elem((2, 2), r(1.0));
        let entries = spec
            .frequencies()
            .iter()
            .map(|&w| SpectralEntry { omega: w, gamma: if w > 0.0 { ones.clone() } else { zeros(2) }, sigma: zeros(2) })
            .collect();
        let bath = BathSpectralFunction::new(entries, None, 1e-9).unwrap();
        let m = build_secular_lindblad(&spec, &bath).unwrap();
        assert_eq!(m.jumps().len(), 1);
        // eigenvalue 2 along (1, 1)/sqrt 2: L = sqrt(2) * sqrt(2) sigma^-
        assert!(max_abs_diff(&m.jumps()[0].mapv(|z| z.norm()).mapv(r), &(sigma_minus() * r(2.0))) < 1e-12);
    }

    #[test]
    fn missing_frequency_and_negative_gamma() {
        let (h, x) = qubit(1.0);
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let partial = BathSpectralFunction::new(
            vec![SpectralEntry { omega: 1.0, gamma: diag_real(&[1.0]), sigma: zeros(1) }],
            None,
            1e-9,
        )
        .unwrap();
        assert!(matches!(build_secular_lindblad(&spec, &partial), Err(Error::Spec(_))));
        let negative = scalar_bath(&spec, |w| if w > 0.0 { -0.1 } else { 0.0 }, None);
        assert!(matches!(build_secular_lindblad(&spec, &negative), Err(Error::Positivity(_))));
    }

    #[test]
    fn lamb_shift_commutes_with_hamiltonian() {
        let mut g = rng(32);
        let h = Hermitian::from_hermitian_part(&random_hermitian(&mut g, 4, 1.0));
        let x = CouplingSet::unlabeled(vec![
            Hermitian::from_hermitian_part(&random_hermitian(&mut g, 4, 1.0)),
            Hermitian::from_hermitian_part(&random_hermitian(&mut g, 4, 1.0)),
        ])
        .unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let entries = spec
            .frequencies()
            .iter()
            .map(|&w| {
                let a = crate::random::random_complex_matrix(&mut g, 2, 1.0);
                SpectralEntry { omega: w, gamma: a.dot(&dagger(&a)), sigma: random_hermitian(&mut g, 2, 1.0) }
            })
            .collect();
        let bath = BathSpectralFunction::new(entries, None, 1e-9).unwrap();
        let delta = lamb_shift(&spec, &bath).unwrap();
        assert!(max_abs(&delta) > 1e-3);
        assert!(max_abs(&commutator(&h, &delta)) < 1e-9);
    }

    #[test]
    fn detailed_balance_examples() {
        let (h, x) = qubit(1.0);
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let beta = 1.0;
        let good = scalar_bath(
            &spec,
            |w| {
                if w > 0.0 {
                    1.0
                } else if w < 0.0 {
                    (-beta).exp()
                } else {
                    0.0
                }
            },
            Some(beta),
        );
        let rep = check_detailed_balance(&good, beta, 1e-12).unwrap();
        assert!(rep.pass && rep.max_residual < 1e-15);
        let flat = scalar_bath(&spec, |_| 1.0, None);
        let rep = check_detailed_balance(&flat, beta, 1e-6).unwrap();
        assert!(!rep.pass);
        let at_plus = rep.residuals.iter().find(|(w, _)| *w == 1.0).unwrap().1;
        assert!((at_plus - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!(check_detailed_balance(&flat, 0.0, 1e-12).unwrap().pass);
        let lonely = BathSpectralFunction::new(
            vec![SpectralEntry { omega: 1.0, gamma: diag_real(&[1.0]), sigma: zeros(1) }],
            None,
            1e-9,
        )
        .unwrap();
        assert!(matches!(check_detailed_balance(&lonely, 1.0, 1e-6), Err(Error::Spec(_))));
    }

    #[test]
    fn families_satisfy_detailed_balance() {
        let mut g = rng(33);
        let h = Hermitian::from_hermitian_part(&random_hermitian(&mut g, 3, 1.0));
        let x =
            CouplingSet::unlabeled(vec![Hermitian::from_hermitian_part(&random_hermitian(&mut g, 3, 1.0))]).unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        for fam in
            [BathFamily::Thermal { kappa: 0.4, beta: 1.3 }, BathFamily::Ohmic { kappa: 0.2, beta: 0.7, cutoff: 3.0 }]
        {
            let bath = BathSpectralFunction::from_family(&fam, &spec).unwrap();
            assert!(check_detailed_balance(&bath, fam.beta().unwrap(), 1e-12).unwrap().pass, "{fam:?}");
        }
        assert!(BathSpectralFunction::from_family(&BathFamily::Flat { kappa: -1.0 }, &spec).is_err());
    }

    #[test]
    fn pauli_rates_and_relaxation() {
        let (h, x) = qubit(1.0);
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let (down, up) = (1.0, (-1.0f64).exp());
        let bath = scalar_bath(
            &spec,
            |w| {
                if w > 0.0 {
                    down
                } else if w < 0.0 {
                    up
                } else {
                    0.0
                }
            },
            Some(1.0),
        );
        let p = extract_pauli_model(&spec, &bath, &h).unwrap();
        assert!((p.rates[(1, 0)] - down).abs() < 1e-15);
        assert!((p.rates[(0, 1)] - up).abs() < 1e-15);
        assert!(p.column_sum_defect() < 1e-12);
        assert_eq!(evolve_pauli(&p, &[0.0, 1.0], 0.0).unwrap(), vec![0.0, 1.0]);
        let late = evolve_pauli(&p, &[0.0, 1.0], 50.0 / down).unwrap();
        let z = 1.0 + (-1.0f64).exp();
        assert!((late[0] - 1.0 / z).abs() < 1e-8);
        assert!((late[1] - (-1.0f64).exp() / z).abs() < 1e-8);
    }

    #[test]
    fn pauli_zero_coupling_and_degenerate_refusal() {
        let h = Hermitian::new(diag_real(&[0.0, 1.0, 2.5])).unwrap();
        let x = CouplingSet::unlabeled(vec![Hermitian::zeros(3)]).unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let bath = BathSpectralFunction::from_family(&BathFamily::Flat { kappa: 1.0 }, &spec).unwrap();
        let p = extract_pauli_model(&spec, &bath, &h).unwrap();
        assert!(p.generator.iter().all(|&v| v == 0.0));

        let hd = Hermitian::new(diag_real(&[0.0, 1.0, 1.0])).unwrap();
        let spec = bohr_decompose(&hd, &x, 1e-8).unwrap();
        let bath = BathSpectralFunction::from_family(&BathFamily::Flat { kappa: 1.0 }, &spec).unwrap();
        assert!(matches!(extract_pauli_model(&spec, &bath, &hd), Err(Error::Degenerate(_))));
        assert!(build_secular_lindblad(&spec, &bath).is_ok());
    }

    #[test]
    fn pauli_stationary_is_boltzmann() {
        let h = Hermitian::new(diag_real(&[0.0, 0.6, 1.7])).unwrap();
        let x = CouplingSet::unlabeled(vec![
            Hermitian::new(crate::ops::from_real(&Array2::from_elem((3, 3), 1.0))).unwrap()
        ])
        .unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let beta = 0.9;
        let bath = BathSpectralFunction::from_family(&BathFamily::Thermal { kappa: 1.0, beta }, &spec).unwrap();
        let p = extract_pauli_model(&spec, &bath, &h).unwrap();
        let st = p.stationary().unwrap();
        let z: f64 = [0.0, 0.6, 1.7].iter().map(|e: &f64| (-beta * e).exp()).sum();
        for (k, e) in [0.0, 0.6, 1.7].iter().enumerate() {
            assert!((st[k] - (-beta * e).exp() / z).abs() < 1e-12);
        }
        let mp = p.generator.dot(&ndarray::Array1::from(st));
        assert!(mp.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gibbs_state_is_stationary_under_detailed_balance() {
        let mut g = rng(34);
        let h = Hermitian::from_hermitian_part(&random_hermitian(&mut g, 4, 1.0));
        let x =
            CouplingSet::unlabeled(vec![Hermitian::from_hermitian_part(&random_hermitian(&mut g, 4, 1.0))]).unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let beta = 1.2;
        let bath =
            BathSpectralFunction::from_family(&BathFamily::Ohmic { kappa: 0.3, beta, cutoff: 5.0 }, &spec).unwrap();
        let m = build_secular_lindblad(&spec, &bath).unwrap();
        let rho = gibbs_state(&h, beta).unwrap();
        assert!(max_abs(&m.apply_generator(&rho).unwrap()) < 1e-9);
    }

    #[test]
    fn diagonal_states_stay_diagonal() {
        let mut g = rng(35);
        let h = Hermitian::new(diag_real(&[0.0, 0.45, 1.3])).unwrap();
        let x =
            CouplingSet::unlabeled(vec![Hermitian::from_hermitian_part(&random_hermitian(&mut g, 3, 1.0))]).unwrap();
        let spec = bohr_decompose(&h, &x, 1e-8).unwrap();
        let bath = BathSpectralFunction::from_family(&BathFamily::Thermal { kappa: 0.5, beta: 0.8 }, &spec).unwrap();
        let m = build_secular_lindblad(&spec, &bath).unwrap();
        let rho0 = DensityMatrix::new(diag_real(&[0.2, 0.5, 0.3])).unwrap();
        for t in [0.5, 2.0, 9.0] {
            let rho = propagate(&m, &rho0, t, Method::ExactExp).unwrap();
            let off = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|(i, j)| i != j);
            for (i, j) in off {
                assert!(rho[(i, j)].norm() <= 1e-10);
            }
        }
    }
}
