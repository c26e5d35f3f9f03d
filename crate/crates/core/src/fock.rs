//! Brute-force density operators on a truncated Fock space.
//!
//! This module is the independent referee for the Gaussian formulas: states are
//! built in the number basis, the memory cell is applied as an explicit
//! beam-splitter dilation with a thermal ancilla, and fidelities, Chernoff
//! traces and Helstrom errors come from eigendecompositions.
//!
//! Operators are stored as dense Hermitian blocks over the connected components
//! of their nonzero pattern. Two-mode basis states `|n₀, n₁⟩` have index
//! `n₀ · dim + n₁`.
//!
//! States built from kets, thermal mixtures and the loss channel also keep a
//! factor `B` with `ρ = B B†` per block. Spectra then come from singular values,
//! which resolve eigenvalues down to `ε² λ_max` instead of `ε λ_max`; that
//! matters for `ρ^p` with small `p` on rank-deficient states.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{domain, QreadError, Result};

pub type C64 = Complex64;

pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-8;
/// Eigenvalues in `[-NEGATIVE_EIGENVALUE_FLOOR, 0)` are clipped to zero; more
/// negative ones are reported as numerical failures.
pub const NEGATIVE_EIGENVALUE_FLOOR: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Block {
    pub indices: Vec<usize>,
    pub matrix: DMatrix<C64>,
    /// `matrix = factor · factor†` when known.
    pub factor: Option<DMatrix<C64>>,
}

/// Sparse column `(basis index, amplitude)`.
pub type SparseColumn = Vec<(usize, C64)>;

#[derive(Debug, Clone)]
pub struct FockOperator {
    dim: usize,
    modes: usize,
    blocks: Vec<Block>,
    /// For each basis index: `(block, position)` or `None`.
    locator: Vec<Option<(usize, usize)>>,
    trace_deficit: f64,
}

/// One ladder operator of a product, `a` or `a†` on `mode`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub creation: bool,
}

impl Ladder {
    pub fn annihilate(mode: usize) -> Self {
        Self { mode, creation: false }
    }

    pub fn create(mode: usize) -> Self {
        Self { mode, creation: true }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Groups the touched basis indices into connected components, each sorted.
fn components(size: usize, touched: &[usize], edges: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(size);
    for (a, b) in edges {
        uf.union(a, b);
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for &i in touched {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    for g in &mut out {
        g.sort_unstable();
        g.dedup();
    }
    out.sort_by_key(|g| g[0]);
    out
}

fn check_dim(dim: usize, modes: usize) -> Result<()> {
    if dim == 0 {
        return domain("Fock cutoff must be >= 1");
    }
    if !(modes == 1 || modes == 2) {
        return domain(format!("only one- and two-mode operators are supported, got {modes}"));
    }
    Ok(())
}

fn check_truncation(dim: usize, deficit: f64, tol: f64) -> Result<()> {
    if deficit >= tol {
        return Err(QreadError::Truncation { dim, deficit, tol });
    }
    Ok(())
}

impl FockOperator {
    /// Builds an operator from `(row, col, value)` entries; duplicates are summed.
    pub fn from_entries(
        dim: usize,
        modes: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
        trace_deficit: f64,
    ) -> Result<Self> {
        check_dim(dim, modes)?;
        let size = dim.pow(modes as u32);
        let mut map: HashMap<(usize, usize), C64> = HashMap::new();
        for (r, c, v) in entries {
            if r >= size || c >= size {
                return domain(format!("entry ({r}, {c}) outside a space of size {size}"));
            }
            *map.entry((r, c)).or_default() += v;
        }
        map.retain(|_, v| *v != C64::new(0.0, 0.0));

        let mut touched: Vec<usize> = map.keys().flat_map(|&(r, c)| [r, c]).collect();
        touched.sort_unstable();
        touched.dedup();
        let groups = components(size, &touched, map.keys().copied());

        let mut locator = vec![None; size];
        let mut blocks = Vec::with_capacity(groups.len());
        for (b, indices) in groups.into_iter().enumerate() {
            for (pos, &i) in indices.iter().enumerate() {
                locator[i] = Some((b, pos));
            }
            blocks.push(Block { matrix: DMatrix::zeros(indices.len(), indices.len()), indices, factor: None });
        }
        for ((r, c), v) in map {
            let (b, i) = locator[r].expect("row indexed");
            let (_, j) = locator[c].expect("column indexed");
            blocks[b].matrix[(i, j)] = v;
        }
        let op = Self { dim, modes, blocks, locator, trace_deficit };
        op.check_hermitian()?;
        Ok(op)
    }

    /// Builds `ρ = Σ_c |c⟩⟨c|` from sparse columns, keeping the factor.
    pub fn from_columns(dim: usize, modes: usize, columns: Vec<SparseColumn>, trace_deficit: f64) -> Result<Self> {
        check_dim(dim, modes)?;
        let size = dim.pow(modes as u32);
        let columns: Vec<SparseColumn> = columns
            .into_iter()
            .map(|c| c.into_iter().filter(|(_, v)| *v != C64::new(0.0, 0.0)).collect::<SparseColumn>())
            .filter(|c| !c.is_empty())
            .collect();
        if let Some(&(i, _)) = columns.iter().flatten().find(|(i, _)| *i >= size) {
            return domain(format!("column entry {i} outside a space of size {size}"));
        }
        let mut touched: Vec<usize> = columns.iter().flatten().map(|(i, _)| *i).collect();
        touched.sort_unstable();
        touched.dedup();
        let edges = columns.iter().flat_map(|c| c.windows(2).map(|w| (w[0].0, w[1].0)));
        let groups = components(size, &touched, edges);

        let mut locator = vec![None; size];
        let mut per_block: Vec<Vec<&SparseColumn>> = vec![Vec::new(); groups.len()];
        for (b, indices) in groups.iter().enumerate() {
            for (pos, &i) in indices.iter().enumerate() {
                locator[i] = Some((b, pos));
            }
        }
        for c in &columns {
            per_block[locator[c[0].0].expect("indexed").0].push(c);
        }
        let blocks = groups
            .into_iter()
            .zip(per_block)
            .map(|(indices, cols)| {
                let mut factor = DMatrix::zeros(indices.len(), cols.len());
                for (j, col) in cols.iter().enumerate() {
                    for &(i, v) in col.iter() {
                        factor[(locator[i].expect("indexed").1, j)] = v;
                    }
                }
                let factor = compress(factor);
                let gram = &factor * factor.adjoint();
                let matrix = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
                Block { indices, matrix, factor: Some(factor) }
            })
            .collect();
        Ok(Self { dim, modes, blocks, locator, trace_deficit })
    }

    pub fn is_factored(&self) -> bool {
        self.blocks.iter().all(|b| b.factor.is_some())
    }

    fn check_hermitian(&self) -> Result<()> {
        for block in &self.blocks {
            let scale = block.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let skew = (&block.matrix - block.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if skew > HERMITIAN_TOL * scale {
                return Err(QreadError::Numerical(format!("operator not Hermitian: skew {skew:e}")));
            }
        }
        Ok(())
    }

    /// Pure state `|ψ⟩⟨ψ|` from truncated amplitudes. `trace_deficit` is the
    /// norm lost to truncation; the stored state is renormalized.
    pub fn from_ket(dim: usize, modes: usize, ket: &[(usize, C64)], tol: f64) -> Result<Self> {
        check_dim(dim, modes)?;
        let norm2: f64 = ket.iter().map(|(_, z)| z.norm_sqr()).sum();
        let deficit = (1.0 - norm2).max(0.0);
        check_truncation(dim, deficit, tol)?;
        let scale = 1.0 / norm2.sqrt();
        let column = ket.iter().map(|&(i, a)| (i, a * scale)).collect();
        Self::from_columns(dim, modes, vec![column], deficit)
    }

    pub fn vacuum(dim: usize, modes: usize) -> Result<Self> {
        Self::from_ket(dim, modes, &[(0, C64::new(1.0, 0.0))], DEFAULT_TRUNCATION_TOL)
    }

    pub fn number_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return domain(format!("|{n}⟩ does not fit below cutoff {dim}"));
        }
        Self::from_ket(dim, 1, &[(n, C64::new(1.0, 0.0))], DEFAULT_TRUNCATION_TOL)
    }

    /// Coherent state `|α⟩`.
    pub fn coherent(alpha: C64, dim: usize) -> Result<Self> {
        let mut amp = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        let mut ket = Vec::with_capacity(dim);
        for n in 0..dim {
            ket.push((n, amp));
            amp *= alpha / ((n + 1) as f64).sqrt();
        }
        Self::from_ket(dim, 1, &ket, DEFAULT_TRUNCATION_TOL)
    }

    /// Single-mode thermal state with `n_mean` mean photons.
    pub fn thermal(n_mean: f64, dim: usize) -> Result<Self> {
        if !(n_mean >= 0.0) || !n_mean.is_finite() {
            return domain(format!("thermal mean photon number must be >= 0, got {n_mean}"));
        }
        let probs = thermal_probabilities(n_mean, dim);
        let total: f64 = probs.iter().sum();
        let deficit = (1.0 - total).max(0.0);
        check_truncation(dim, deficit, DEFAULT_TRUNCATION_TOL)?;
        let columns = probs.into_iter().enumerate().map(|(n, p)| vec![(n, C64::new((p / total).sqrt(), 0.0))]).collect();
        Self::from_columns(dim, 1, columns, deficit)
    }

    /// Two-mode squeezed vacuum `(cosh ξ)⁻¹ Σ (tanh ξ)ⁿ |n, n⟩` with `sinh²ξ = n_s`.
    pub fn tmsv(n_s: f64, dim: usize) -> Result<Self> {
        Self::tmsv_with_tol(n_s, dim, DEFAULT_TRUNCATION_TOL)
    }

    pub fn tmsv_with_tol(n_s: f64, dim: usize, tol: f64) -> Result<Self> {
        if !(n_s >= 0.0) || !n_s.is_finite() {
            return domain(format!("N_S must be >= 0, got {n_s}"));
        }
        let tanh = (n_s / (n_s + 1.0)).sqrt();
        let mut amp = 1.0 / (n_s + 1.0).sqrt();
        let mut ket = Vec::with_capacity(dim);
        for n in 0..dim {
            ket.push((n * dim + n, C64::new(amp, 0.0)));
            amp *= tanh;
        }
        Self::from_ket(dim, 2, &ket, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn size(&self) -> usize {
        self.dim.pow(self.modes as u32)
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match (self.locator.get(row).copied().flatten(), self.locator.get(col).copied().flatten()) {
            (Some((b, i)), Some((bc, j))) if b == bc => self.blocks[b].matrix[(i, j)],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.matrix.trace().re).sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.size(), self.size());
        for block in &self.blocks {
            for (i, &r) in block.indices.iter().enumerate() {
                for (j, &c) in block.indices.iter().enumerate() {
                    out[(r, c)] = block.matrix[(i, j)];
                }
            }
        }
        out
    }

    fn split(&self, index: usize, mode: usize) -> (usize, usize) {
        if self.modes == 1 {
            return (index, 0);
        }
        let (n0, n1) = (index / self.dim, index % self.dim);
        if mode == 0 {
            (n0, n1)
        } else {
            (n1, n0)
        }
    }

    fn join(&self, n: usize, rest: usize, mode: usize) -> usize {
        if self.modes == 1 {
            return n;
        }
        if mode == 0 {
            n * self.dim + rest
        } else {
            rest * self.dim + n
        }
    }

    /// Applies a ladder product `ops[0] ops[1] … ops[k−1]` to a basis state;
    /// `None` when it vanishes or leaves the truncated space.
    fn apply_ladders(&self, index: usize, ops: &[Ladder]) -> Option<(usize, f64)> {
        let mut idx = index;
        let mut coeff = 1.0;
        for op in ops.iter().rev() {
            if op.mode >= self.modes {
                return None;
            }
            let (n, rest) = self.split(idx, op.mode);
            let n_new = if op.creation {
                coeff *= ((n + 1) as f64).sqrt();
                n + 1
            } else {
                if n == 0 {
                    return None;
                }
                coeff *= (n as f64).sqrt();
                n - 1
            };
            if n_new >= self.dim {
                return None;
            }
            idx = self.join(n_new, rest, op.mode);
        }
        Some((idx, coeff))
    }

    /// `Tr(ρ O)` for a product of ladder operators.
    pub fn expect_ladders(&self, ops: &[Ladder]) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for block in &self.blocks {
            for &x in &block.indices {
                if let Some((y, c)) = self.apply_ladders(x, ops) {
                    total += self.get(x, y) * c;
                }
            }
        }
        total
    }

    pub fn mean_photon_number(&self, mode: usize) -> f64 {
        self.expect_ladders(&[Ladder::create(mode), Ladder::annihilate(mode)]).re
    }

    /// Quadrature means and covariance matrix in the `(q₀, p₀, q₁, p₁)` ordering,
    /// `q = a + a†`, `p = i(a† − a)`, vacuum covariance `I`.
    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = 2 * self.modes;
        let terms = |k: usize| -> [(C64, Ladder); 2] {
            let mode = k / 2;
            if k.is_multiple_of(2) {
                [(C64::new(1.0, 0.0), Ladder::annihilate(mode)), (C64::new(1.0, 0.0), Ladder::create(mode))]
            } else {
                [(C64::new(0.0, -1.0), Ladder::annihilate(mode)), (C64::new(0.0, 1.0), Ladder::create(mode))]
            }
        };
        let mean = DVector::from_fn(n, |k, _| {
            terms(k).iter().map(|(c, op)| c * self.expect_ladders(&[*op])).sum::<C64>().re
        });
        let second = |k: usize, l: usize| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for (ck, ok) in terms(k) {
                for (cl, ol) in terms(l) {
                    acc += ck * cl * self.expect_ladders(&[ok, ol]);
                }
            }
            acc
        };
        let cov = DMatrix::from_fn(n, n, |k, l| 0.5 * (second(k, l) + second(l, k)).re - mean[k] * mean[l]);
        (mean, cov)
    }

    /// Couples `mode` to a thermal ancilla with `n_b` mean photons through the
    /// beam splitter whose Heisenberg action is `a ↦ √r a + √(1−r) b`, then
    /// traces out the ancilla.
    pub fn apply_loss(&self, mode: usize, r: f64, n_b: f64, dim_bath: usize) -> Result<Self> {
        self.apply_loss_with_tol(mode, r, n_b, dim_bath, DEFAULT_TRUNCATION_TOL)
    }

    pub fn apply_loss_with_tol(&self, mode: usize, r: f64, n_b: f64, dim_bath: usize, tol: f64) -> Result<Self> {
        if mode >= self.modes {
            return domain(format!("mode {mode} out of range for a {}-mode operator", self.modes));
        }
        if !(0.0..=1.0).contains(&r) {
            return domain(format!("reflectivity must lie in [0, 1], got {r}"));
        }
        if !(n_b >= 0.0) || !n_b.is_finite() {
            return domain(format!("N_B must be >= 0, got {n_b}"));
        }
        if dim_bath == 0 {
            return domain("ancilla cutoff must be >= 1");
        }
        let bath = if n_b == 0.0 { vec![1.0] } else { thermal_probabilities(n_b, dim_bath) };
        let bath_deficit = 1.0 - bath.iter().sum::<f64>();
        check_truncation(dim_bath, bath_deficit, tol)?;

        let theta = if r == 0.0 { std::f64::consts::FRAC_PI_2 } else { (1.0 - r).sqrt().atan2(r.sqrt()) };
        let unitaries: Vec<DMatrix<f64>> = (0..self.dim + bath.len() - 1)
            .map(|total| beam_splitter_block(total, theta))
            .collect();
        let input_trace = self.trace();
        let raw = if self.is_factored() {
            self.loss_on_factor(mode, &bath, &unitaries)?
        } else {
            self.loss_on_matrix(mode, &bath, &unitaries)?
        };
        let kept = raw.trace();
        let lost = input_trace - kept;
        check_truncation(self.dim, lost.max(0.0), tol)?;
        let deficit = 1.0 - (1.0 - self.trace_deficit) * kept;
        Ok(raw.scaled(1.0 / kept, deficit))
    }

    /// Kraus form on the factor: every column `|c⟩` becomes the columns
    /// `√p_k ⟨j|_anc U |c⟩|k⟩_anc` for all ancilla inputs `k` and outputs `j`.
    fn loss_on_factor(&self, mode: usize, bath: &[f64], unitaries: &[DMatrix<f64>]) -> Result<Self> {
        let mut columns = Vec::new();
        for block in &self.blocks {
            let factor = block.factor.as_ref().expect("factored");
            for c in 0..factor.ncols() {
                let entries: Vec<(usize, usize, C64)> = block
                    .indices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| factor[(*i, c)] != C64::new(0.0, 0.0))
                    .map(|(i, &x)| {
                        let (n, rest) = self.split(x, mode);
                        (n, rest, factor[(i, c)])
                    })
                    .collect();
                let n_max = entries.iter().map(|e| e.0).max().unwrap_or(0);
                for (k, &p) in bath.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let weight = p.sqrt();
                    for j in 0..=n_max + k {
                        let column: SparseColumn = entries
                            .iter()
                            .filter_map(|&(n, rest, v)| {
                                let total = n + k;
                                let m = total.checked_sub(j)?;
                                (m < self.dim).then(|| (self.join(m, rest, mode), v * (weight * unitaries[total][(m, n)])))
                            })
                            .collect();
                        columns.push(column);
                    }
                }
            }
        }
        Self::from_columns(self.dim, self.modes, columns, 0.0)
    }

    fn loss_on_matrix(&self, mode: usize, bath: &[f64], unitaries: &[DMatrix<f64>]) -> Result<Self> {
        // (rest, rest', n' − n) → output column over the target occupation m
        let mut acc: HashMap<(usize, usize, isize), Vec<C64>> = HashMap::new();
        for block in &self.blocks {
            for (i, &x) in block.indices.iter().enumerate() {
                for (j, &y) in block.indices.iter().enumerate() {
                    let value = block.matrix[(i, j)];
                    if value == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let (n, rest) = self.split(x, mode);
                    let (n2, rest2) = self.split(y, mode);
                    let shift = n2 as isize - n as isize;
                    let column = acc.entry((rest, rest2, shift)).or_insert_with(|| vec![C64::new(0.0, 0.0); self.dim]);
                    for (k, &p) in bath.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let (total, total2) = (n + k, n2 + k);
                        let (u, u2) = (&unitaries[total], &unitaries[total2]);
                        // ancilla output j = total − m must match on both sides
                        for m in 0..=total.min(self.dim - 1) {
                            let m2 = m as isize + shift;
                            if m2 < 0 || m2 as usize >= self.dim || m2 as usize > total2 {
                                continue;
                            }
                            column[m] += value * (p * u[(m, n)] * u2[(m2 as usize, n2)]);
                        }
                    }
                }
            }
        }

        let mut entries = Vec::new();
        for ((rest, rest2, shift), column) in acc {
            for (m, v) in column.into_iter().enumerate() {
                if v != C64::new(0.0, 0.0) {
                    let m2 = (m as isize + shift) as usize;
                    entries.push((self.join(m, rest, mode), self.join(m2, rest2, mode), v));
                }
            }
        }
        let raw = Self::from_entries(self.dim, self.modes, entries, 0.0)
            .map_err(|_| QreadError::Numerical("loss channel output not Hermitian".into()))?;
        Ok(raw.hermitian_part())
    }

    fn scaled(mut self, factor: f64, trace_deficit: f64) -> Self {
        for block in &mut self.blocks {
            block.matrix *= C64::new(factor, 0.0);
            if let Some(f) = block.factor.as_mut() {
                *f *= C64::new(factor.sqrt(), 0.0);
            }
        }
        self.trace_deficit = trace_deficit;
        self
    }

    fn hermitian_part(mut self) -> Self {
        for block in &mut self.blocks {
            let adj = block.matrix.adjoint();
            block.matrix = (&block.matrix + adj) * C64::new(0.5, 0.0);
        }
        self
    }

    /// `ρ^p` (not renormalized) through the eigendecomposition of each block.
    pub fn power(&self, p: f64) -> Result<Self> {
        let mut out = self.clone();
        for block in &mut out.blocks {
            block.matrix = power_from(block_spectral(&block.matrix, block.factor.as_ref())?, p)?;
            block.factor = None;
        }
        Ok(out)
    }

    /// Checks positivity (to the negative floor) and returns the spectrum.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut all = Vec::new();
        for block in &self.blocks {
            all.extend(block_spectral(&block.matrix, block.factor.as_ref())?.values);
        }
        Ok(all)
    }
}

fn thermal_probabilities(n_mean: f64, dim: usize) -> Vec<f64> {
    let ratio = n_mean / (n_mean + 1.0);
    let mut p = 1.0 / (n_mean + 1.0);
    let mut out = Vec::with_capacity(dim);
    for _ in 0..dim {
        out.push(p);
        p *= ratio;
    }
    out
}

/// `exp(θ K)` on the `total`-photon subspace spanned by `|m, total − m⟩`,
/// with `K` the matrix of `a†b − a b†`.
fn beam_splitter_block(total: usize, theta: f64) -> DMatrix<f64> {
    let size = total + 1;
    let mut k = DMatrix::zeros(size, size);
    for n in 0..total {
        // a†b |n, total−n⟩ = √((n+1)(total−n)) |n+1, total−n−1⟩
        let v = (((n + 1) * (total - n)) as f64).sqrt();
        k[(n + 1, n)] = v;
        k[(n, n + 1)] = -v;
    }
    let u = (k * theta).exp();
    if theta == std::f64::consts::FRAC_PI_2 {
        // full transmission is a signed permutation; drop the round-off
        return u.map(f64::round);
    }
    u
}

fn clip_eigenvalue(l: f64) -> Result<f64> {
    if l < -NEGATIVE_EIGENVALUE_FLOOR {
        return Err(QreadError::Numerical(format!(
            "eigenvalue {l:e} below the floor -{NEGATIVE_EIGENVALUE_FLOOR:e}; not a state"
        )));
    }
    Ok(l.max(0.0))
}

/// Entries below this fraction of the largest entry are zeroed before
/// diagonalizing. nalgebra's implicit QR returns NaN on some rank-one blocks
/// whose entries reach ~1e-146; the flush shifts eigenvalues by at most
/// `n · 1e-80 · max|A|`.
const RELATIVE_FLUSH: f64 = 1e-80;

fn hermitian_eigen(matrix: &DMatrix<C64>) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    let eig = SymmetricEigen::new(flush(matrix));
    if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(QreadError::Numerical("eigendecomposition produced non-finite eigenvalues".into()));
    }
    Ok(eig)
}

struct Spectral {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

/// Eigendecomposition with negatives clipped (to the floor).
fn spectral(matrix: &DMatrix<C64>) -> Result<Spectral> {
    let eig = hermitian_eigen(matrix)?;
    let values = eig.eigenvalues.iter().map(|&l| clip_eigenvalue(l)).collect::<Result<Vec<_>>>()?;
    Ok(Spectral { values, vectors: eig.eigenvectors })
}

/// Square factor with the same Gram matrix: `B† = QR` gives `B B† = R† R`.
fn compress(factor: DMatrix<C64>) -> DMatrix<C64> {
    if factor.ncols() <= factor.nrows() {
        return factor;
    }
    factor.adjoint().qr().r().adjoint()
}

fn flush(matrix: &DMatrix<C64>) -> DMatrix<C64> {
    let cutoff = RELATIVE_FLUSH * matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    matrix.map(|z| if z.norm() < cutoff { C64::new(0.0, 0.0) } else { z })
}

/// Spectrum of `B B†` from the singular values of `B`.
fn factor_spectral(factor: &DMatrix<C64>) -> Result<Spectral> {
    if factor.is_empty() {
        return Ok(Spectral { values: Vec::new(), vectors: DMatrix::zeros(factor.nrows(), 0) });
    }
    let svd = SVD::new(flush(factor), true, false);
    if svd.singular_values.iter().any(|v| !v.is_finite()) {
        return Err(QreadError::Numerical("SVD produced non-finite singular values".into()));
    }
    let vectors = svd.u.expect("left singular vectors requested");
    // singular values at the backward-error level of the SVD are zeros; the
    // resulting eigenvalue floor is ~(n ε)² λ_max
    let top = svd.singular_values.max();
    let zero = factor.nrows().max(factor.ncols()) as f64 * f64::EPSILON * top;
    let values = svd.singular_values.iter().map(|&v| if v <= zero { 0.0 } else { v * v }).collect();
    Ok(Spectral { values, vectors })
}

fn block_spectral(matrix: &DMatrix<C64>, factor: Option<&DMatrix<C64>>) -> Result<Spectral> {
    match factor {
        Some(f) => factor_spectral(f),
        None => spectral(matrix),
    }
}

/// Like [`spectral`], but positives at round-off level relative to the top
/// eigenvalue are set to zero, so that a square root of a low-rank block does
/// not amplify noise (√(1e−17) per spurious eigenvalue). Only used when no
/// factor is available.
fn spectral_rank_revealing(matrix: &DMatrix<C64>) -> Result<Spectral> {
    let mut s = spectral(matrix)?;
    let top = s.values.iter().copied().fold(0.0, f64::max);
    let zero = f64::EPSILON * s.values.len() as f64 * top;
    for l in &mut s.values {
        if *l <= zero {
            *l = 0.0;
        }
    }
    Ok(s)
}

fn power_from(s: Spectral, p: f64) -> Result<DMatrix<C64>> {
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(
        s.values.len(),
        s.values.iter().map(|&l| C64::new(if l == 0.0 { 0.0 } else { l.powf(p) }, 0.0)),
    ));
    Ok(&s.vectors * diag * s.vectors.adjoint())
}

/// Restriction of an operator to one group of the common block refinement.
struct Restricted {
    matrix: DMatrix<C64>,
    factor: Option<DMatrix<C64>>,
}

impl Restricted {
    fn spectral(&self) -> Result<Spectral> {
        block_spectral(&self.matrix, self.factor.as_ref())
    }
}

fn restrict(op: &FockOperator, group: &[usize]) -> Restricted {
    let matrix = DMatrix::from_fn(group.len(), group.len(), |i, j| op.get(group[i], group[j]));
    let factor = op.is_factored().then(|| {
        let position: HashMap<usize, usize> = group.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let member: Vec<&Block> = op.blocks.iter().filter(|b| position.contains_key(&b.indices[0])).collect();
        let cols = member.iter().map(|b| b.factor.as_ref().expect("factored").ncols()).sum();
        let mut out = DMatrix::zeros(group.len(), cols);
        let mut offset = 0;
        for b in member {
            let f = b.factor.as_ref().expect("factored");
            for (i, idx) in b.indices.iter().enumerate() {
                let row = position[idx];
                for c in 0..f.ncols() {
                    out[(row, offset + c)] = f[(i, c)];
                }
            }
            offset += f.ncols();
        }
        out
    });
    Restricted { matrix, factor }
}

/// Restrictions of two operators to the common refinement of their blocks.
fn joint_blocks(rho: &FockOperator, sigma: &FockOperator) -> Result<Vec<(Restricted, Restricted)>> {
    if rho.dim != sigma.dim || rho.modes != sigma.modes {
        return domain(format!(
            "operators live on different spaces: dim {} / {} modes vs dim {} / {} modes",
            rho.dim, rho.modes, sigma.dim, sigma.modes
        ));
    }
    let size = rho.size();
    let mut touched: Vec<usize> = rho
        .blocks
        .iter()
        .chain(&sigma.blocks)
        .flat_map(|b| b.indices.iter().copied())
        .collect();
    touched.sort_unstable();
    touched.dedup();
    let edges = rho
        .blocks
        .iter()
        .chain(&sigma.blocks)
        .flat_map(|b| b.indices.windows(2).map(|w| (w[0], w[1])));
    let groups = components(size, &touched, edges);
    Ok(groups.iter().map(|g| (restrict(rho, g), restrict(sigma, g))).collect())
}

/// Uhlmann fidelity `[Tr √(√ρ σ √ρ)]²`, the convention in which two coherent
/// states have fidelity `e^{−|α−β|²}`. With factors `ρ = AA†`, `σ = BB†` this
/// is `‖A†B‖₁²`.
pub fn uhlmann_fidelity(rho: &FockOperator, sigma: &FockOperator) -> Result<f64> {
    let mut root_fidelity = 0.0;
    for (a, b) in joint_blocks(rho, sigma)? {
        root_fidelity += match (&a.factor, &b.factor) {
            (Some(fa), Some(fb)) if fa.is_empty() || fb.is_empty() => 0.0,
            (Some(fa), Some(fb)) => {
                let svd = SVD::new(flush(&(fa.adjoint() * fb)), false, false);
                if svd.singular_values.iter().any(|v| !v.is_finite()) {
                    return Err(QreadError::Numerical("SVD produced non-finite singular values".into()));
                }
                svd.singular_values.sum()
            }
            _ => {
                let sqrt_a = power_from(spectral_rank_revealing(&a.matrix)?, 0.5)?;
                let inner = &sqrt_a * &b.matrix * &sqrt_a;
                let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
                spectral_rank_revealing(&inner)?.values.iter().map(|l| l.sqrt()).sum::<f64>()
            }
        };
    }
    Ok(root_fidelity * root_fidelity)
}

/// `Tr(ρ^s σ^{1−s})` for `s ∈ (0, 1)`.
pub fn chernoff_trace(rho: &FockOperator, sigma: &FockOperator, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s must lie in (0, 1), got {s}"));
    }
    let mut total = 0.0;
    for (a, b) in joint_blocks(rho, sigma)? {
        let ea = a.spectral()?;
        let eb = b.spectral()?;
        let overlap = ea.vectors.adjoint() * &eb.vectors;
        for (i, &la) in ea.values.iter().enumerate() {
            if la == 0.0 {
                continue;
            }
            let pa = la.powf(s);
            for (j, &lb) in eb.values.iter().enumerate() {
                if lb == 0.0 {
                    continue;
                }
                total += pa * lb.powf(1.0 - s) * overlap[(i, j)].norm_sqr();
            }
        }
    }
    Ok(total)
}

/// Trace norm `‖ρ − σ‖₁`.
pub fn trace_norm_difference(rho: &FockOperator, sigma: &FockOperator) -> Result<f64> {
    let mut total = 0.0;
    for (a, b) in joint_blocks(rho, sigma)? {
        total += hermitian_eigen(&(a.matrix - b.matrix))?.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    }
    Ok(total)
}

/// Minimum error probability `[1 − D(ρ, σ)]/2` for equiprobable hypotheses,
/// `D = ½‖ρ − σ‖₁`.
pub fn helstrom_error(rho: &FockOperator, sigma: &FockOperator) -> Result<f64> {
    let distance = 0.5 * trace_norm_difference(rho, sigma)?;
    Ok(0.5 * (1.0 - distance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn beam_splitter_blocks_are_orthogonal() {
        for total in [0, 1, 5, 40, 120] {
            let u = beam_splitter_block(total, 0.7);
            let err = (&u * u.transpose() - DMatrix::identity(total + 1, total + 1)).amax();
            assert!(err < 1e-11, "N = {total}: {err:e}");
        }
    }

    #[test]
    fn full_transmission_swaps_exactly() {
        let u = beam_splitter_block(7, std::f64::consts::FRAC_PI_2);
        for m in 0..8 {
            for n in 0..8 {
                let expected = if m + n == 7 { 1.0 } else { 0.0 };
                assert_eq!(u[(m, n)].abs(), expected);
            }
        }
    }

    #[test]
    fn tmsv_small_energy_is_vacuum() {
        let rho = FockOperator::tmsv(0.0, 10).unwrap();
        assert_eq!(rho.get(0, 0), c(1.0));
        assert_eq!(rho.trace(), 1.0);
    }

    #[test]
    fn tmsv_schmidt_coefficients_and_marginal() {
        let dim = 60;
        let rho = FockOperator::tmsv(1.0, dim).unwrap();
        // sinh²ξ = 1: amplitudes (tanh ξ)^n / cosh ξ = 2^(−(n+1)/2)
        for n in 0..5 {
            let amp = 2f64.powf(-((n + 1) as f64) / 2.0);
            assert_relative_eq!(rho.get(n * dim + n, n * dim + n).re, amp * amp, max_relative = 1e-12);
        }
        assert_relative_eq!(rho.mean_photon_number(0), 1.0, epsilon = 1e-8);
        assert_relative_eq!(rho.mean_photon_number(1), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn tmsv_truncation_error() {
        let err = FockOperator::tmsv(5.0, 10).unwrap_err();
        assert!(matches!(err, QreadError::Truncation { .. }));
    }

    #[test]
    fn loss_limits() {
        let rho = FockOperator::tmsv(0.5, 25).unwrap();
        let same = rho.apply_loss(0, 1.0, 0.3, 30).unwrap();
        let diff = (same.to_dense() - rho.to_dense()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);

        let alpha = FockOperator::coherent(c(1.2), 30).unwrap();
        let gone = alpha.apply_loss(0, 0.0, 0.0, 1).unwrap();
        assert_relative_eq!(gone.get(0, 0).re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(gone.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn loss_output_moments() {
        let rho = FockOperator::tmsv(1.0, 40).unwrap();
        let out = rho.apply_loss(0, 0.5, 0.1, 40).unwrap();
        let (mean, v) = out.moments();
        assert!(mean.amax() < 1e-12);
        let expected = crate::gaussian::TwoModeNormalCm { a: 2.1, b: 3.0, c: 2.0 }.dense();
        for i in 0..4 {
            for j in 0..4 {
                assert!((v[(i, j)] - expected[(i, j)]).abs() < 1e-6, "V[{i},{j}] = {}", v[(i, j)]);
            }
        }
    }

    #[test]
    fn fidelity_basics() {
        let a = FockOperator::coherent(c(1.0), 40).unwrap();
        let b = FockOperator::coherent(c(0.0), 40).unwrap();
        assert_relative_eq!(uhlmann_fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(uhlmann_fidelity(&a, &b).unwrap(), (-1f64).exp(), epsilon = 1e-10);
        assert_relative_eq!(uhlmann_fidelity(&b, &a).unwrap(), (-1f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn helstrom_basics() {
        let zero = FockOperator::number_state(0, 5).unwrap();
        let one = FockOperator::number_state(1, 5).unwrap();
        assert_relative_eq!(helstrom_error(&zero, &one).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(helstrom_error(&zero, &zero).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn chernoff_of_identical_states() {
        let rho = FockOperator::thermal(0.7, 60).unwrap().apply_loss(0, 0.4, 0.2, 40).unwrap();
        for s in [0.2, 0.5, 0.8] {
            assert_relative_eq!(chernoff_trace(&rho, &rho, s).unwrap(), 1.0, epsilon = 1e-10);
        }
        assert!(chernoff_trace(&rho, &rho, 1.0).is_err());
    }

    #[test]
    fn thermal_power_trace() {
        // eigenvalues Nⁿ/(N+1)^(n+1): Tr ρ^p = 1/[(N+1)^p − N^p]
        let rho = FockOperator::thermal(1.0, 200).unwrap();
        let tr = rho.power(0.5).unwrap().trace();
        assert_relative_eq!(tr, 1.0 / (2f64.sqrt() - 1.0), max_relative = 1e-10);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let a = FockOperator::vacuum(5, 1).unwrap();
        let b = FockOperator::vacuum(6, 1).unwrap();
        assert!(uhlmann_fidelity(&a, &b).is_err());
        assert!(FockOperator::vacuum(5, 3).is_err());
    }

    #[test]
    fn negative_spectrum_rejected() {
        let op = FockOperator::from_entries(2, 1, [(0, 0, c(1.5)), (1, 1, c(-0.5))], 0.0).unwrap();
        assert!(matches!(op.eigenvalues(), Err(QreadError::Numerical(_))));
        let skew = FockOperator::from_entries(2, 1, [(0, 1, c(1.0)), (1, 0, c(0.5))], 0.0);
        assert!(skew.is_err());
    }
}
