//! Labeled multipartite complex linear algebra: density operators, pure
//! states and isometries over named subsystems, with tensor products,
//! partial trace, purification and isometry application.
//!
//! Conventions: the tensor index is row-major over the declared system order
//! (first system outermost). Every operation documents the system order of
//! its output. All values are immutable after construction.

use nalgebra::{Complex, DMatrix, DVector};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::{max_dim, TOL_HERM, TOL_ISO, TOL_PSD, TOL_TRACE};

pub type C64 = Complex<f64>;

/// Largest entry magnitude of a complex matrix or vector.
pub fn max_abs<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, C>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A named subsystem with its Hilbert-space dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemLabel {
    pub name: String,
    pub dim: usize,
}

impl SystemLabel {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        SystemLabel { name: name.into(), dim }
    }
}

fn check_systems(systems: &[SystemLabel]) -> Result<()> {
    for (i, s) in systems.iter().enumerate() {
        if s.dim < 1 {
            return Err(Error::InvalidArgument(format!("system `{}` has dim 0", s.name)));
        }
        if systems[..i].iter().any(|t| t.name == s.name) {
            return Err(Error::DuplicateLabel(s.name.clone()));
        }
    }
    Ok(())
}

fn total_dim(systems: &[SystemLabel]) -> Result<usize> {
    let d: usize = systems.iter().map(|s| s.dim).product();
    let cap = max_dim();
    if d > cap {
        return Err(Error::DimensionCap(d, cap));
    }
    Ok(d)
}

/// Row-major strides for the given dims.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets contributed by every joint index over `dims`, where the k-th
/// position carries stride `full_strides[k]`.
fn offsets(dims: &[usize], full_strides: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let mut out = vec![0usize; total];
    let local = strides(dims);
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut acc = 0;
        for k in 0..dims.len() {
            let idx = (flat / local[k]) % dims[k];
            acc += idx * full_strides[k];
        }
        *slot = acc;
    }
    out
}

fn split_keep(systems: &[SystemLabel], keep: &[&str]) -> Result<(Vec<usize>, Vec<usize>)> {
    for name in keep {
        if !systems.iter().any(|s| s.name == *name) {
            return Err(Error::UnknownLabel(name.to_string()));
        }
    }
    let mut kept = Vec::new();
    let mut traced = Vec::new();
    for (i, s) in systems.iter().enumerate() {
        if keep.contains(&s.name.as_str()) {
            kept.push(i);
        } else {
            traced.push(i);
        }
    }
    Ok((kept, traced))
}

fn permutation_map(systems: &[SystemLabel], new_order: &[&str]) -> Result<Vec<usize>> {
    if new_order.len() != systems.len() {
        return Err(Error::InvalidArgument("new order is not a permutation".into()));
    }
    let mut perm = Vec::with_capacity(new_order.len());
    for name in new_order {
        let pos = systems
            .iter()
            .position(|s| s.name == *name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
        if perm.contains(&pos) {
            return Err(Error::InvalidArgument(format!("label `{name}` repeated in permutation")));
        }
        perm.push(pos);
    }
    Ok(perm)
}

/// For each flat index in the permuted basis, the corresponding flat index in
/// the original basis.
fn reindex(systems: &[SystemLabel], perm: &[usize]) -> Vec<usize> {
    let old_dims: Vec<usize> = systems.iter().map(|s| s.dim).collect();
    let old_strides = strides(&old_dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| old_dims[p]).collect();
    let new_strides = strides(&new_dims);
    let total: usize = new_dims.iter().product();
    let mut map = vec![0usize; total];
    for (flat, slot) in map.iter_mut().enumerate() {
        let mut acc = 0;
        for k in 0..perm.len() {
            let idx = (flat / new_strides[k]) % new_dims[k];
            acc += idx * old_strides[perm[k]];
        }
        *slot = acc;
    }
    map
}

/// A density operator over labeled subsystems.
#[derive(Debug, Clone)]
pub struct MultiState {
    systems: Vec<SystemLabel>,
    matrix: DMatrix<C64>,
}

impl MultiState {
    /// Validating constructor: checks labels, shape, the dimension cap,
    /// hermiticity, unit trace and positivity.
    pub fn new(systems: Vec<SystemLabel>, matrix: DMatrix<C64>) -> Result<Self> {
        check_systems(&systems)?;
        let d = total_dim(&systems)?;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but systems give dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                d
            )));
        }
        let s = MultiState { systems, matrix };
        s.validate()?;
        Ok(s)
    }

    /// Constructor for outputs of trusted operations; skips the O(d^3)
    /// positivity check.
    pub(crate) fn from_parts(systems: Vec<SystemLabel>, matrix: DMatrix<C64>) -> Self {
        MultiState { systems, matrix }
    }

    /// Re-checks the density-operator invariants.
    pub fn validate(&self) -> Result<()> {
        let herm = max_abs(&(&self.matrix - self.matrix.adjoint()));
        if herm > TOL_HERM {
            return Err(Error::InvalidState(format!("hermiticity defect {herm:.3e}")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {} != 1", tr)));
        }
        let min_eig = self
            .eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(())
    }

    pub fn systems(&self) -> &[SystemLabel] {
        &self.systems
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.name.as_str()).collect()
    }

    /// Eigenvalues of the density operator (unsorted).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        herm.symmetric_eigen().eigenvalues.iter().cloned().collect()
    }

    /// Kronecker product. Output systems are `self.systems ++ other.systems`.
    pub fn tensor(&self, other: &MultiState) -> Result<MultiState> {
        let mut systems = self.systems.clone();
        for s in &other.systems {
            if systems.iter().any(|t| t.name == s.name) {
                return Err(Error::DuplicateLabel(s.name.clone()));
            }
            systems.push(s.clone());
        }
        total_dim(&systems)?;
        Ok(MultiState::from_parts(systems, self.matrix.kronecker(&other.matrix)))
    }

    /// Traces out every system not named in `keep`. Kept systems stay in
    /// their original relative order; the trace is preserved.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<MultiState> {
        let (kept, traced) = split_keep(&self.systems, keep)?;
        if traced.is_empty() {
            return Ok(self.clone());
        }
        let dims: Vec<usize> = self.systems.iter().map(|s| s.dim).collect();
        let full = strides(&dims);
        let keep_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
        let tr_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
        let keep_off = offsets(&keep_dims, &kept.iter().map(|&i| full[i]).collect::<Vec<_>>());
        let tr_off = offsets(&tr_dims, &traced.iter().map(|&i| full[i]).collect::<Vec<_>>());
        let kd: usize = keep_dims.iter().product();
        let mut out = DMatrix::<C64>::zeros(kd, kd);
        for (r, &ro) in keep_off.iter().enumerate() {
            for (c, &co) in keep_off.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &t in &tr_off {
                    acc += self.matrix[(ro + t, co + t)];
                }
                out[(r, c)] = acc;
            }
        }
        let systems = kept.iter().map(|&i| self.systems[i].clone()).collect();
        Ok(MultiState::from_parts(systems, out))
    }

    /// Canonical eigendecomposition purification. The reference system comes
    /// first in the output order and has dim equal to `self.dim()`;
    /// eigenvectors are paired with reference basis states in descending
    /// eigenvalue order, ties broken by the original eigenvector index.
    pub fn purify(&self, ref_label: &str) -> Result<PureState> {
        if self.systems.iter().any(|s| s.name == ref_label) {
            return Err(Error::DuplicateLabel(ref_label.to_string()));
        }
        let d = self.dim();
        let herm = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        let eig = herm.symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        if eig.eigenvalues[*order.last().unwrap()] < -TOL_PSD {
            return Err(Error::InvalidState(format!(
                "cannot purify: eigenvalue {:.3e} below -{TOL_PSD:.0e}",
                eig.eigenvalues[*order.last().unwrap()]
            )));
        }
        let mut systems = vec![SystemLabel::new(ref_label, d)];
        systems.extend(self.systems.iter().cloned());
        total_dim(&systems)?;
        let mut vec = DVector::<C64>::zeros(d * d);
        for (k, &src) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[src].max(0.0);
            let w = lambda.sqrt();
            for i in 0..d {
                vec[k * d + i] = eig.eigenvectors[(i, src)].scale(w);
            }
        }
        Ok(PureState::from_parts(systems, vec))
    }

    /// Reorders the subsystems; the matrix is re-indexed consistently.
    pub fn permute(&self, new_order: &[&str]) -> Result<MultiState> {
        let perm = permutation_map(&self.systems, new_order)?;
        let map = reindex(&self.systems, &perm);
        let d = self.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] = self.matrix[(map[r], map[c])];
            }
        }
        let systems = perm.iter().map(|&p| self.systems[p].clone()).collect();
        Ok(MultiState::from_parts(systems, out))
    }

    /// Diagonal qubit state diag(p, 1-p) on a named system.
    pub fn qubit_diag(label: &str, p: f64) -> Result<MultiState> {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(p, 0.0),
            C64::new(1.0 - p, 0.0),
        ]));
        MultiState::new(vec![SystemLabel::new(label, 2)], m)
    }

    /// Maximally mixed state on a named system.
    pub fn maximally_mixed(label: &str, dim: usize) -> Result<MultiState> {
        let m = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        MultiState::new(vec![SystemLabel::new(label, dim)], m)
    }
}

/// A pure state over labeled subsystems.
#[derive(Debug, Clone)]
pub struct PureState {
    systems: Vec<SystemLabel>,
    vector: DVector<C64>,
}

impl PureState {
    pub fn new(systems: Vec<SystemLabel>, vector: DVector<C64>) -> Result<Self> {
        check_systems(&systems)?;
        let d = total_dim(&systems)?;
        if vector.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {} but systems give dimension {}",
                vector.len(),
                d
            )));
        }
        if (vector.norm() - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("norm {} != 1", vector.norm())));
        }
        Ok(PureState { systems, vector })
    }

    pub(crate) fn from_parts(systems: Vec<SystemLabel>, vector: DVector<C64>) -> Self {
        PureState { systems, vector }
    }

    pub fn systems(&self) -> &[SystemLabel] {
        &self.systems
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.name.as_str()).collect()
    }

    /// |v><v| as a MultiState with the same system order.
    pub fn to_density(&self) -> MultiState {
        let m = &self.vector * self.vector.adjoint();
        MultiState::from_parts(self.systems.clone(), m)
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut systems = self.systems.clone();
        for s in &other.systems {
            if systems.iter().any(|t| t.name == s.name) {
                return Err(Error::DuplicateLabel(s.name.clone()));
            }
            systems.push(s.clone());
        }
        total_dim(&systems)?;
        Ok(PureState::from_parts(systems, self.vector.kronecker(&other.vector)))
    }

    /// Reduced density operator on the kept systems, computed without
    /// forming the full projector.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<MultiState> {
        let (kept, traced) = split_keep(&self.systems, keep)?;
        let dims: Vec<usize> = self.systems.iter().map(|s| s.dim).collect();
        let full = strides(&dims);
        let keep_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
        let tr_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
        let keep_off = offsets(&keep_dims, &kept.iter().map(|&i| full[i]).collect::<Vec<_>>());
        let tr_off = offsets(&tr_dims, &traced.iter().map(|&i| full[i]).collect::<Vec<_>>());
        let kd: usize = keep_dims.iter().product();
        let mut out = DMatrix::<C64>::zeros(kd, kd);
        for (r, &ro) in keep_off.iter().enumerate() {
            for (c, &co) in keep_off.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &t in &tr_off {
                    acc += self.vector[ro + t] * self.vector[co + t].conj();
                }
                out[(r, c)] = acc;
            }
        }
        let systems = kept.iter().map(|&i| self.systems[i].clone()).collect();
        Ok(MultiState::from_parts(systems, out))
    }

    pub fn permute(&self, new_order: &[&str]) -> Result<PureState> {
        let perm = permutation_map(&self.systems, new_order)?;
        let map = reindex(&self.systems, &perm);
        let mut out = DVector::<C64>::zeros(self.dim());
        for i in 0..self.dim() {
            out[i] = self.vector[map[i]];
        }
        let systems = perm.iter().map(|&p| self.systems[p].clone()).collect();
        Ok(PureState::from_parts(systems, out))
    }

    /// Basis state |k> on a single labeled system.
    pub fn basis(label: &str, dim: usize, k: usize) -> Result<PureState> {
        if k >= dim {
            return Err(Error::InvalidArgument(format!("basis index {k} out of range")));
        }
        let mut v = DVector::<C64>::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        PureState::new(vec![SystemLabel::new(label, dim)], v)
    }

    /// Maximally entangled pair 1/sqrt(2)(|00> + |11>) on two named qubits.
    pub fn epr(a: &str, b: &str) -> Result<PureState> {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let v = DVector::from_vec(vec![h, C64::new(0.0, 0.0), C64::new(0.0, 0.0), h]);
        PureState::new(vec![SystemLabel::new(a, 2), SystemLabel::new(b, 2)], v)
    }

    /// 1/sqrt(2)(|000> + |111>) on three named qubits.
    pub fn ghz(r: &str, a: &str, b: &str) -> Result<PureState> {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut v = DVector::<C64>::zeros(8);
        v[0] = h;
        v[7] = h;
        PureState::new(
            vec![SystemLabel::new(r, 2), SystemLabel::new(a, 2), SystemLabel::new(b, 2)],
            v,
        )
    }
}

/// A complex matrix with labeled input and output systems, satisfying
/// V†V = 1 entrywise within `TOL_ISO`.
#[derive(Debug, Clone)]
pub struct Isometry {
    in_systems: Vec<SystemLabel>,
    out_systems: Vec<SystemLabel>,
    matrix: DMatrix<C64>,
}

impl Isometry {
    pub fn new(
        in_systems: Vec<SystemLabel>,
        out_systems: Vec<SystemLabel>,
        matrix: DMatrix<C64>,
    ) -> Result<Self> {
        check_systems(&in_systems)?;
        check_systems(&out_systems)?;
        let din = total_dim(&in_systems)?;
        let dout = total_dim(&out_systems)?;
        if matrix.nrows() != dout || matrix.ncols() != din {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but signature gives {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                dout,
                din
            )));
        }
        let gram = matrix.adjoint() * &matrix;
        let defect = max_abs(&(gram - DMatrix::<C64>::identity(din, din)));
        if defect > TOL_ISO {
            return Err(Error::InvalidIsometry(format!("V†V deviates from 1 by {defect:.3e}")));
        }
        Ok(Isometry { in_systems, out_systems, matrix })
    }

    pub fn in_systems(&self) -> &[SystemLabel] {
        &self.in_systems
    }

    pub fn out_systems(&self) -> &[SystemLabel] {
        &self.out_systems
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Identity channel relabeling `from` as `to`.
    pub fn identity(from: &str, to: &str, dim: usize) -> Result<Isometry> {
        Isometry::new(
            vec![SystemLabel::new(from, dim)],
            vec![SystemLabel::new(to, dim)],
            DMatrix::identity(dim, dim),
        )
    }

    /// Returns a copy with renamed input/output systems, matrix unchanged.
    pub fn relabeled(&self, ins: &[&str], outs: &[&str]) -> Result<Isometry> {
        if ins.len() != self.in_systems.len() || outs.len() != self.out_systems.len() {
            return Err(Error::InvalidArgument("relabel arity mismatch".into()));
        }
        let in_systems = self
            .in_systems
            .iter()
            .zip(ins)
            .map(|(s, n)| SystemLabel::new(*n, s.dim))
            .collect();
        let out_systems = self
            .out_systems
            .iter()
            .zip(outs)
            .map(|(s, n)| SystemLabel::new(*n, s.dim))
            .collect();
        Isometry::new(in_systems, out_systems, self.matrix.clone())
    }

    fn prepare<'a>(&self, systems: &'a [SystemLabel]) -> Result<Vec<&'a str>> {
        for s in &self.in_systems {
            let found = systems
                .iter()
                .find(|t| t.name == s.name)
                .ok_or_else(|| Error::UnknownLabel(s.name.clone()))?;
            if found.dim != s.dim {
                return Err(Error::DimensionMismatch(format!(
                    "system `{}` has dim {} in state but {} in isometry",
                    s.name, found.dim, s.dim
                )));
            }
        }
        let rest: Vec<&str> = systems
            .iter()
            .filter(|s| !self.in_systems.iter().any(|t| t.name == s.name))
            .map(|s| s.name.as_str())
            .collect();
        for o in &self.out_systems {
            if rest.contains(&o.name.as_str()) {
                return Err(Error::DuplicateLabel(o.name.clone()));
            }
        }
        Ok(rest)
    }

    /// Applies the isometry, acting as identity on systems outside
    /// `in_systems`. Output system order: untouched systems in their
    /// original relative order, then `out_systems`.
    pub fn apply_pure(&self, s: &PureState) -> Result<PureState> {
        let rest = self.prepare(s.systems())?;
        let mut order = rest.clone();
        order.extend(self.in_systems.iter().map(|t| t.name.as_str()));
        let permuted = s.permute(&order)?;
        let din: usize = self.in_systems.iter().map(|t| t.dim).product();
        let dout: usize = self.out_systems.iter().map(|t| t.dim).product();
        let drest = permuted.dim() / din;
        let mut systems: Vec<SystemLabel> = permuted.systems[..rest.len()].to_vec();
        systems.extend(self.out_systems.iter().cloned());
        total_dim(&systems)?;
        let mut out = DVector::<C64>::zeros(drest * dout);
        for r in 0..drest {
            for o in 0..dout {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..din {
                    acc += self.matrix[(o, c)] * permuted.vector[r * din + c];
                }
                out[r * dout + o] = acc;
            }
        }
        Ok(PureState::from_parts(systems, out))
    }

    /// Density-operator version of [`Isometry::apply_pure`].
    pub fn apply_density(&self, s: &MultiState) -> Result<MultiState> {
        let rest = self.prepare(s.systems())?;
        let mut order = rest.clone();
        order.extend(self.in_systems.iter().map(|t| t.name.as_str()));
        let permuted = s.permute(&order)?;
        let din: usize = self.in_systems.iter().map(|t| t.dim).product();
        let dout: usize = self.out_systems.iter().map(|t| t.dim).product();
        let drest = permuted.dim() / din;
        let mut systems: Vec<SystemLabel> = permuted.systems[..rest.len()].to_vec();
        systems.extend(self.out_systems.iter().cloned());
        total_dim(&systems)?;
        let mut out = DMatrix::<C64>::zeros(drest * dout, drest * dout);
        // Blockwise V B V† over the rest x rest block structure.
        for r in 0..drest {
            for rp in 0..drest {
                let block = permuted.matrix.view((r * din, rp * din), (din, din));
                let vb = &self.matrix * block;
                let vbv = vb * self.matrix.adjoint();
                for o in 0..dout {
                    for op in 0..dout {
                        out[(r * dout + o, rp * dout + op)] = vbv[(o, op)];
                    }
                }
            }
        }
        Ok(MultiState::from_parts(systems, out))
    }

    /// Kronecker product of two isometries on disjoint labels.
    pub fn tensor(&self, other: &Isometry) -> Result<Isometry> {
        let mut ins = self.in_systems.clone();
        ins.extend(other.in_systems.iter().cloned());
        let mut outs = self.out_systems.clone();
        outs.extend(other.out_systems.iter().cloned());
        Isometry::new(ins, outs, self.matrix.kronecker(&other.matrix))
    }
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

/// Any of the three value kinds in the on-disk JSON format.
#[derive(Debug, Clone)]
pub enum QObject {
    Density(MultiState),
    Pure(PureState),
    IsometryObj(Isometry),
}

fn systems_to_json(systems: &[SystemLabel]) -> Value {
    Value::Array(
        systems
            .iter()
            .map(|s| json!({"name": s.name, "dim": s.dim}))
            .collect(),
    )
}

fn systems_from_json(v: &Value) -> Result<Vec<SystemLabel>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::InvalidArgument("`systems` must be an array".into()))?;
    arr.iter()
        .map(|s| {
            let name = s["name"]
                .as_str()
                .ok_or_else(|| Error::InvalidArgument("system missing `name`".into()))?;
            let dim = s["dim"]
                .as_u64()
                .ok_or_else(|| Error::InvalidArgument("system missing `dim`".into()))?;
            Ok(SystemLabel::new(name, dim as usize))
        })
        .collect()
}

fn complex_from_json(v: &Value) -> Result<C64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::InvalidArgument("matrix entry must be [re, im]".into()))?;
    let re = pair[0].as_f64().ok_or_else(|| Error::InvalidArgument("bad real part".into()))?;
    let im = pair[1].as_f64().ok_or_else(|| Error::InvalidArgument("bad imag part".into()))?;
    Ok(C64::new(re, im))
}

fn matrix_from_json(v: &Value, rows: usize, cols: usize) -> Result<DMatrix<C64>> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == rows)
        .ok_or_else(|| Error::InvalidArgument(format!("`data` must have {rows} rows")))?;
    let mut m = DMatrix::<C64>::zeros(rows, cols);
    for (i, row) in arr.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|a| a.len() == cols)
            .ok_or_else(|| Error::InvalidArgument(format!("row {i} must have {cols} entries")))?;
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = complex_from_json(e)?;
        }
    }
    Ok(m)
}

fn matrix_to_json(m: &DMatrix<C64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

impl QObject {
    /// Parses the workbench JSON schema: `{"systems": [...], "kind":
    /// "density"|"pure"|"isometry", "data": ...}` with rows outermost;
    /// isometries carry `in_systems`/`out_systems` instead of `systems`.
    pub fn from_json_str(text: &str) -> Result<QObject> {
        let v: Value = serde_json::from_str(text)?;
        let kind = v["kind"]
            .as_str()
            .ok_or_else(|| Error::InvalidArgument("missing `kind`".into()))?;
        match kind {
            "density" => {
                let systems = systems_from_json(&v["systems"])?;
                let d: usize = systems.iter().map(|s| s.dim).product();
                let m = matrix_from_json(&v["data"], d, d)?;
                Ok(QObject::Density(MultiState::new(systems, m)?))
            }
            "pure" => {
                let systems = systems_from_json(&v["systems"])?;
                let d: usize = systems.iter().map(|s| s.dim).product();
                let arr = v["data"]
                    .as_array()
                    .filter(|a| a.len() == d)
                    .ok_or_else(|| Error::InvalidArgument(format!("`data` must have {d} entries")))?;
                let mut vec = DVector::<C64>::zeros(d);
                for (i, e) in arr.iter().enumerate() {
                    vec[i] = complex_from_json(e)?;
                }
                Ok(QObject::Pure(PureState::new(systems, vec)?))
            }
            "isometry" => {
                let ins = systems_from_json(&v["in_systems"])?;
                let outs = systems_from_json(&v["out_systems"])?;
                let din: usize = ins.iter().map(|s| s.dim).product();
                let dout: usize = outs.iter().map(|s| s.dim).product();
                let m = matrix_from_json(&v["data"], dout, din)?;
                Ok(QObject::IsometryObj(Isometry::new(ins, outs, m)?))
            }
            other => Err(Error::InvalidArgument(format!("unknown kind `{other}`"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            QObject::Density(s) => json!({
                "systems": systems_to_json(s.systems()),
                "kind": "density",
                "data": matrix_to_json(s.matrix()),
            }),
            QObject::Pure(s) => json!({
                "systems": systems_to_json(s.systems()),
                "kind": "pure",
                "data": Value::Array(
                    s.vector().iter().map(|z| json!([z.re, z.im])).collect()
                ),
            }),
            QObject::IsometryObj(v) => json!({
                "in_systems": systems_to_json(v.in_systems()),
                "out_systems": systems_to_json(v.out_systems()),
                "kind": "isometry",
                "data": matrix_to_json(v.matrix()),
            }),
        }
    }
}
