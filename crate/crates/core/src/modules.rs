//! Finite-dimensional right Λ-modules and their exact structure.
//!
//! A right module is encoded by one action matrix per basis element of Λ,
//! acting on column vectors: `m·e_k = action[k] * m`. The module law reads
//! `Σ_k c[i][j][k] action[k] = action[j] * action[i]`.

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::field::{complement_indices, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleFile {
    pub dim: usize,
    pub action: Vec<Vec<Vec<i64>>>,
}

#[derive(Debug)]
struct ModuleData {
    alg: Arc<Algebra>,
    dim: usize,
    action: Vec<Matrix>,
}

#[derive(Clone, Debug)]
pub struct Module(Arc<ModuleData>);

impl PartialEq for Module {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.dim == other.0.dim && Algebra::same(&self.0.alg, &other.0.alg) && self.0.action == other.0.action)
    }
}
impl Eq for Module {}

impl Module {
    /// Build and validate the module law.
    pub fn new(alg: &Arc<Algebra>, action: Vec<Matrix>) -> Result<Module> {
        let dim = action.first().map(|a| a.rows()).unwrap_or(0);
        if action.len() != alg.dim() {
            return Err(Error::Module(format!("expected {} action matrices, got {}", alg.dim(), action.len())));
        }
        if action.iter().any(|a| a.shape() != (dim, dim) || a.p() != alg.p()) {
            return Err(Error::Module("action matrices must be square of a common size".into()));
        }
        let m = Module::new_unchecked(alg, dim, action);
        m.check_law()?;
        Ok(m)
    }

    pub(crate) fn new_unchecked(alg: &Arc<Algebra>, dim: usize, action: Vec<Matrix>) -> Module {
        debug_assert_eq!(action.len(), alg.dim());
        Module(Arc::new(ModuleData { alg: alg.clone(), dim, action }))
    }

    pub fn from_file(alg: &Arc<Algebra>, f: &ModuleFile) -> Result<Module> {
        if f.action.len() != alg.dim() {
            return Err(Error::Module(format!("expected {} action matrices", alg.dim())));
        }
        let action = f
            .action
            .iter()
            .map(|a| Matrix::from_rows(alg.p(), f.dim, f.dim, a))
            .collect::<Result<Vec<_>>>()?;
        if alg.dim() == 0 {
            return Err(Error::Module("algebra of dimension 0".into()));
        }
        Module::new(alg, action)
    }

    pub fn to_file(&self) -> ModuleFile {
        ModuleFile { dim: self.dim(), action: self.0.action.iter().map(matrix_rows).collect() }
    }

    fn check_law(&self) -> Result<()> {
        let a = &self.0.alg;
        let n = a.dim();
        let unit = self.act(a.unit());
        if !unit.is_identity() {
            return Err(Error::Module("unit does not act as the identity".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let mut lhs = Matrix::zeros(a.p(), self.dim(), self.dim());
                for k in 0..n {
                    let c = a.c(i, j, k);
                    if c != 0 {
                        lhs = lhs.add(&self.0.action[k].scale(c as i64));
                    }
                }
                if lhs != self.0.action[j].mul(&self.0.action[i]) {
                    return Err(Error::Module(format!(
                        "module law fails for basis pair ({}, {})",
                        a.basis()[i],
                        a.basis()[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn zero(alg: &Arc<Algebra>) -> Module {
        let action = (0..alg.dim()).map(|_| Matrix::zeros(alg.p(), 0, 0)).collect();
        Module::new_unchecked(alg, 0, action)
    }

    /// The right regular module Λ_Λ.
    pub fn regular(alg: &Arc<Algebra>) -> Module {
        Module::new_unchecked(alg, alg.dim(), alg.regular_action().to_vec())
    }

    /// The free module Λ^g.
    pub fn free(alg: &Arc<Algebra>, g: usize) -> Module {
        let reg = Module::regular(alg);
        Module::direct_sum_of(alg, &vec![reg; g])
    }

    /// The module k^d on which every basis element in `nil` acts as zero and the
    /// unit acts as the identity. Only valid when those elements span an ideal
    /// complementary to the unit (e.g. truncated polynomial algebras).
    pub fn trivial(alg: &Arc<Algebra>, d: usize) -> Result<Module> {
        let action = (0..alg.dim())
            .map(|k| Matrix::scalar(alg.p(), d, alg.unit()[k] as i64))
            .collect();
        let m = Module::new_unchecked(alg, d, action);
        m.check_law()?;
        Ok(m)
    }

    pub fn alg(&self) -> &Arc<Algebra> {
        &self.0.alg
    }
    pub fn p(&self) -> u32 {
        self.0.alg.p()
    }
    pub fn dim(&self) -> usize {
        self.0.dim
    }
    pub fn action(&self) -> &[Matrix] {
        &self.0.action
    }
    pub fn is_zero(&self) -> bool {
        self.0.dim == 0
    }

    /// Matrix of the right action of an algebra element.
    pub fn act(&self, elem: &[u32]) -> Matrix {
        let mut out = Matrix::zeros(self.p(), self.dim(), self.dim());
        for (k, &c) in elem.iter().enumerate() {
            if c != 0 {
                out = out.add(&self.0.action[k].scale(c as i64));
            }
        }
        out
    }

    pub fn direct_sum_of(alg: &Arc<Algebra>, ms: &[Module]) -> Module {
        let dim = ms.iter().map(|m| m.dim()).sum();
        let action = (0..alg.dim())
            .map(|k| {
                let blocks: Vec<&Matrix> = ms.iter().map(|m| &m.0.action[k]).collect();
                Matrix::block_diag(alg.p(), &blocks)
            })
            .collect();
        Module::new_unchecked(alg, dim, action)
    }

    /// Direct sum with its canonical injections and projections.
    pub fn direct_sum(alg: &Arc<Algebra>, ms: &[Module]) -> DirectSum {
        let sum = Module::direct_sum_of(alg, ms);
        let mut injections = Vec::new();
        let mut projections = Vec::new();
        let mut off = 0;
        for m in ms {
            let mut inj = Matrix::zeros(alg.p(), sum.dim(), m.dim());
            inj.set_block(off, 0, &Matrix::identity(alg.p(), m.dim()));
            projections.push(ModuleMap::new_unchecked(&sum, m, inj.transpose()));
            injections.push(ModuleMap::new_unchecked(m, &sum, inj));
            off += m.dim();
        }
        DirectSum { module: sum, injections, projections }
    }

    /// Linear dual over the given algebra, which must be the opposite of ours.
    pub fn dual_onto(&self, alg: &Arc<Algebra>) -> Module {
        let action = self.0.action.iter().map(|a| a.transpose()).collect();
        Module::new_unchecked(alg, self.dim(), action)
    }

    /// Linear dual, a right module over the opposite algebra.
    pub fn dual(&self) -> Module {
        self.dual_onto(&self.0.alg.opposite())
    }

    /// Submodule spanned by the (independent, invariant) columns of `basis`.
    pub fn submodule(&self, basis: &Matrix) -> Result<ModuleMap> {
        let action = self
            .0
            .action
            .iter()
            .map(|a| {
                basis
                    .solve(&a.mul(basis))
                    .ok_or_else(|| Error::Construction("subspace is not a submodule".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let sub = Module::new_unchecked(&self.0.alg, basis.cols(), action);
        Ok(ModuleMap::new_unchecked(&sub, self, basis.clone()))
    }

    /// Quotient by the submodule spanned by the columns of `basis`; the
    /// complement is spanned by standard basis vectors. Returns the
    /// projection and a linear section of it.
    pub fn quotient(&self, basis: &Matrix) -> Result<Quotient> {
        let p = self.p();
        let n = self.dim();
        let basis = basis.column_space();
        let comp = complement_indices(&basis);
        let e_c = Matrix::identity(p, n).select_cols(&comp);
        let full = Matrix::hstack(p, n, &[&basis, &e_c]);
        let inv = full.inverse().ok_or_else(|| Error::Construction("quotient basis not invertible".into()))?;
        let q = inv.block(basis.cols(), 0, comp.len(), n);
        let action = self.0.action.iter().map(|a| q.mul(&a.mul(&e_c))).collect::<Vec<_>>();
        // invariance of the subspace
        for a in &self.0.action {
            if !q.mul(&a.mul(&basis)).is_zero() {
                return Err(Error::Construction("subspace is not a submodule".into()));
            }
        }
        let quo = Module::new_unchecked(&self.0.alg, comp.len(), action);
        Ok(Quotient { map: ModuleMap::new_unchecked(self, &quo, q), section: e_c })
    }

    pub fn identity(&self) -> ModuleMap {
        ModuleMap::identity(self)
    }
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<i64>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(|&x| x as i64).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct DirectSum {
    pub module: Module,
    pub injections: Vec<ModuleMap>,
    pub projections: Vec<ModuleMap>,
}

#[derive(Clone, Debug)]
pub struct Quotient {
    pub map: ModuleMap,
    /// Linear (not necessarily Λ-linear) right inverse of `map`.
    pub section: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMap {
    pub source: Module,
    pub target: Module,
    pub matrix: Matrix,
}

impl ModuleMap {
    pub fn new(source: &Module, target: &Module, matrix: Matrix) -> Result<ModuleMap> {
        if matrix.shape() != (target.dim(), source.dim()) {
            return Err(Error::Shape(format!(
                "map matrix is {:?}, expected {}x{}",
                matrix.shape(),
                target.dim(),
                source.dim()
            )));
        }
        if !Algebra::same(source.alg(), target.alg()) {
            return Err(Error::Module("map between modules over different algebras".into()));
        }
        let f = ModuleMap::new_unchecked(source, target, matrix);
        if !f.is_linear() {
            return Err(Error::Module("matrix does not commute with the action".into()));
        }
        Ok(f)
    }

    pub(crate) fn new_unchecked(source: &Module, target: &Module, matrix: Matrix) -> ModuleMap {
        debug_assert_eq!(matrix.shape(), (target.dim(), source.dim()));
        ModuleMap { source: source.clone(), target: target.clone(), matrix }
    }

    pub fn is_linear(&self) -> bool {
        let gens = self.source.alg().generators().to_vec();
        gens.iter().all(|&k| {
            self.matrix.mul(&self.source.action()[k]) == self.target.action()[k].mul(&self.matrix)
        })
    }

    pub fn identity(m: &Module) -> ModuleMap {
        ModuleMap::new_unchecked(m, m, Matrix::identity(m.p(), m.dim()))
    }

    pub fn zero(source: &Module, target: &Module) -> ModuleMap {
        ModuleMap::new_unchecked(source, target, Matrix::zeros(source.p(), target.dim(), source.dim()))
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &ModuleMap) -> ModuleMap {
        assert_eq!(f.target.dim(), self.source.dim(), "composition shape");
        ModuleMap::new_unchecked(&f.source, &self.target, self.matrix.mul(&f.matrix))
    }

    pub fn add(&self, g: &ModuleMap) -> ModuleMap {
        ModuleMap::new_unchecked(&self.source, &self.target, self.matrix.add(&g.matrix))
    }

    pub fn sub(&self, g: &ModuleMap) -> ModuleMap {
        ModuleMap::new_unchecked(&self.source, &self.target, self.matrix.sub(&g.matrix))
    }

    pub fn scale(&self, c: i64) -> ModuleMap {
        ModuleMap::new_unchecked(&self.source, &self.target, self.matrix.scale(c))
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn is_injective(&self) -> bool {
        self.matrix.is_injective()
    }

    pub fn is_surjective(&self) -> bool {
        self.matrix.is_surjective()
    }

    pub fn is_iso(&self) -> bool {
        self.source.dim() == self.target.dim() && self.is_injective()
    }

    pub fn dual(&self) -> ModuleMap {
        let alg = self.source.alg().opposite();
        ModuleMap::new_unchecked(&self.target.dual_onto(&alg), &self.source.dual_onto(&alg), self.matrix.transpose())
    }

    /// Dual map between already-dualized modules.
    pub fn dual_between(&self, source: &Module, target: &Module) -> ModuleMap {
        ModuleMap::new_unchecked(source, target, self.matrix.transpose())
    }

    /// Linear combination Σ c_i f_i of maps with common source and target.
    pub fn combination(source: &Module, target: &Module, maps: &[ModuleMap], coeffs: &[u32]) -> ModuleMap {
        let mut m = Matrix::zeros(source.p(), target.dim(), source.dim());
        for (f, &c) in maps.iter().zip(coeffs) {
            if c != 0 {
                m = m.add(&f.matrix.scale(c as i64));
            }
        }
        ModuleMap::new_unchecked(source, target, m)
    }
}

/// A short exact sequence `0 → A → B → C → 0`.
#[derive(Clone, Debug)]
pub struct Conflation {
    pub left: ModuleMap,
    pub right: ModuleMap,
}

impl Conflation {
    pub fn middle(&self) -> &Module {
        &self.left.target
    }
    pub fn first(&self) -> &Module {
        &self.left.source
    }
    pub fn last(&self) -> &Module {
        &self.right.target
    }

    pub fn verify(&self) -> Result<()> {
        let ok = self.right.after(&self.left).is_zero()
            && self.left.is_injective()
            && self.right.is_surjective()
            && self.left.matrix.rank() + self.right.matrix.rank() == self.middle().dim();
        if ok {
            Ok(())
        } else {
            Err(Error::Construction("sequence is not a conflation".into()))
        }
    }

    pub fn dual(&self) -> Conflation {
        let alg = self.left.source.alg().opposite();
        let (a, b, c) = (self.first().dual_onto(&alg), self.middle().dual_onto(&alg), self.last().dual_onto(&alg));
        Conflation {
            left: ModuleMap::new_unchecked(&c, &b, self.right.matrix.transpose()),
            right: ModuleMap::new_unchecked(&b, &a, self.left.matrix.transpose()),
        }
    }
}

/// Kernel, image and cokernel of a map.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub kernel: ModuleMap,
    pub image: Module,
    pub cokernel: ModuleMap,
    /// Linear section of the cokernel projection.
    pub cokernel_section: Matrix,
}

/// Constraint matrix whose kernel is the vectorized space Hom_Λ(m, n).
fn hom_constraints(m: &Module, n: &Module) -> Matrix {
    let p = m.p();
    let (a, b) = (m.dim(), n.dim());
    let gens = m.alg().generators();
    let blocks: Vec<Matrix> = gens
        .iter()
        .map(|&k| {
            // vec(X A) - vec(B X) = (A^T ⊗ I_b - I_a ⊗ B) vec(X)
            m.action()[k].transpose().kron(&Matrix::identity(p, b)).sub(&Matrix::identity(p, a).kron(&n.action()[k]))
        })
        .collect();
    let refs: Vec<&Matrix> = blocks.iter().collect();
    Matrix::vstack(p, a * b, &refs)
}

/// Canonical basis of Hom_Λ(m, n).
pub fn hom_space(m: &Module, n: &Module) -> Vec<ModuleMap> {
    let p = m.p();
    if m.dim() == 0 || n.dim() == 0 {
        return vec![];
    }
    let k = if m.alg().generators().is_empty() {
        Matrix::identity(p, m.dim() * n.dim())
    } else {
        hom_constraints(m, n).kernel_basis()
    };
    (0..k.cols())
        .map(|c| ModuleMap::new_unchecked(m, n, Matrix::unvectorize(p, n.dim(), m.dim(), &k.col(c))))
        .collect()
}

pub fn hom_dim(m: &Module, n: &Module) -> usize {
    if m.dim() == 0 || n.dim() == 0 {
        return 0;
    }
    if m.alg().generators().is_empty() {
        return m.dim() * n.dim();
    }
    hom_constraints(m, n).nullity()
}

pub fn factorize(f: &ModuleMap) -> Factorization {
    let ker = f.matrix.kernel_basis();
    let kernel = f.source.submodule(&ker).expect("kernel is a submodule");
    let img = f.matrix.column_space();
    let image = f.target.submodule(&img).expect("image is a submodule").source;
    let q = f.target.quotient(&img).expect("image is a submodule");
    Factorization { kernel, image, cokernel: q.map, cokernel_section: q.section }
}

pub fn kernel(f: &ModuleMap) -> ModuleMap {
    f.source.submodule(&f.matrix.kernel_basis()).expect("kernel is a submodule")
}

pub fn cokernel(f: &ModuleMap) -> Quotient {
    f.target.quotient(&f.matrix.column_space()).expect("image is a submodule")
}

/// Pushout of `f: Z → X` and `g: Z → Y`: returns (P, X → P, Y → P).
pub fn pushout(f: &ModuleMap, g: &ModuleMap) -> (Module, ModuleMap, ModuleMap) {
    let alg = f.source.alg().clone();
    let sum = Module::direct_sum(&alg, &[f.target.clone(), g.target.clone()]);
    let h = Matrix::vstack(alg.p(), f.source.dim(), &[&f.matrix, &g.matrix.neg()]);
    let q = sum.module.quotient(&h.column_space()).expect("image is a submodule").map;
    let ix = q.after(&sum.injections[0]);
    let iy = q.after(&sum.injections[1]);
    (q.target.clone(), ix, iy)
}

/// Pullback of `f: X → Z` and `g: Y → Z`: returns (Q, Q → X, Q → Y).
pub fn pullback(f: &ModuleMap, g: &ModuleMap) -> (Module, ModuleMap, ModuleMap) {
    let alg = f.source.alg().clone();
    let sum = Module::direct_sum(&alg, &[f.source.clone(), g.source.clone()]);
    let h = Matrix::hstack(alg.p(), f.target.dim(), &[&f.matrix, &g.matrix.neg()]);
    let inc = sum.module.submodule(&h.kernel_basis()).expect("kernel is a submodule");
    let px = sum.projections[0].after(&inc);
    let py = sum.projections[1].after(&inc);
    (inc.source.clone(), px, py)
}

/// Columns generating `m` as a module: a lift of a basis of m/m·rad when a
/// radical is declared, otherwise the standard basis.
pub fn generators(m: &Module) -> Matrix {
    let p = m.p();
    let n = m.dim();
    match m.alg().radical() {
        None => Matrix::identity(p, n),
        Some(rad) => {
            let mut cols = Vec::new();
            for r in 0..rad.cols() {
                let a = m.act(&rad.col(r));
                for c in 0..n {
                    cols.push(a.col(c));
                }
            }
            let mrad = Matrix::from_cols(p, n, &cols).column_space();
            let comp = complement_indices(&mrad);
            Matrix::identity(p, n).select_cols(&comp)
        }
    }
}

/// The map Λ^g → m sending the t-th free generator to column t of `gens`.
pub fn free_map(m: &Module, gens: &Matrix) -> ModuleMap {
    let alg = m.alg().clone();
    let (p, d) = (alg.p(), alg.dim());
    let free = Module::free(&alg, gens.cols());
    let mut pi = Matrix::zeros(p, m.dim(), gens.cols() * d);
    for t in 0..gens.cols() {
        let v = gens.col(t);
        for l in 0..d {
            let img = m.action()[l].mul_vec(&v);
            for (r, &x) in img.iter().enumerate() {
                pi.set(r, t * d + l, x);
            }
        }
    }
    ModuleMap::new_unchecked(&free, m, pi)
}

/// `0 → Ω m → Λ^g → m → 0`.
pub fn free_cover(m: &Module) -> Conflation {
    let gens = generators(m);
    let mut pi = free_map(m, &gens);
    if !pi.is_surjective() {
        // the declared radical is not contained in the Jacobson radical
        pi = free_map(m, &Matrix::identity(m.p(), m.dim()));
    }
    Conflation { left: kernel(&pi), right: pi }
}

/// `0 → m → I → Σ m → 0` with I injective, dual to the free cover of Dm.
pub fn injective_embed(m: &Module) -> Conflation {
    let alg = m.alg().clone();
    let cover = free_cover(&m.dual());
    let (k, f) = (cover.first(), cover.middle());
    let (dk, df) = (k.dual_onto(&alg), f.dual_onto(&alg));
    Conflation {
        left: ModuleMap::new_unchecked(m, &df, cover.right.matrix.transpose()),
        right: ModuleMap::new_unchecked(&df, &dk, cover.left.matrix.transpose()),
    }
}

pub fn syzygy(m: &Module) -> Module {
    free_cover(m).first().clone()
}

pub fn cosyzygy(m: &Module) -> Module {
    injective_embed(m).last().clone()
}

/// Solve `Σ a_t (post ∘ h_t) = target` over a basis `hs`; returns the combination.
pub(crate) fn solve_in_span(hs: &[Matrix], target: &Matrix) -> Option<Vec<u32>> {
    let p = target.p();
    let rows = target.rows() * target.cols();
    let cols: Vec<Vec<u32>> = hs.iter().map(|h| h.vectorize()).collect();
    let a = Matrix::from_cols(p, rows, &cols);
    let b = Matrix::column_vector(p, &target.vectorize());
    a.solve(&b).map(|x| x.col(0))
}

/// A section of `pi` that is Λ-linear, if one exists.
pub fn module_section(pi: &ModuleMap) -> Option<ModuleMap> {
    let hs = hom_space(&pi.target, &pi.source);
    let comps: Vec<Matrix> = hs.iter().map(|h| pi.matrix.mul(&h.matrix)).collect();
    let id = Matrix::identity(pi.target.p(), pi.target.dim());
    if pi.target.dim() == 0 {
        return Some(ModuleMap::zero(&pi.target, &pi.source));
    }
    let coeffs = solve_in_span(&comps, &id)?;
    Some(ModuleMap::combination(&pi.target, &pi.source, &hs, &coeffs))
}

/// A Λ-linear retraction of the injective map `iota`, if one exists.
pub fn module_retraction(iota: &ModuleMap) -> Option<ModuleMap> {
    let hs = hom_space(&iota.target, &iota.source);
    if iota.source.dim() == 0 {
        return Some(ModuleMap::zero(&iota.target, &iota.source));
    }
    let comps: Vec<Matrix> = hs.iter().map(|h| h.matrix.mul(&iota.matrix)).collect();
    let id = Matrix::identity(iota.source.p(), iota.source.dim());
    let coeffs = solve_in_span(&comps, &id)?;
    Some(ModuleMap::combination(&iota.target, &iota.source, &hs, &coeffs))
}

pub fn is_projective(m: &Module) -> bool {
    if m.dim() == 0 {
        return true;
    }
    let cover = free_cover(m);
    if cover.first().dim() == 0 {
        return true;
    }
    module_section(&cover.right).is_some()
}

/// A Λ-linear `X: a → b` with `X·S = T` for every right constraint and
/// `S·X = T` for every left constraint, if one exists.
pub fn solve_module_map(a: &Module, b: &Module, right: &[(Matrix, Matrix)], left: &[(Matrix, Matrix)]) -> Option<Matrix> {
    let p = a.p();
    let hs = hom_space(a, b);
    let mut cols: Vec<Vec<u32>> = vec![Vec::new(); hs.len()];
    let mut rhs = Vec::new();
    for (s, t) in right {
        for (c, h) in hs.iter().enumerate() {
            cols[c].extend(h.matrix.mul(s).vectorize());
        }
        rhs.extend(t.vectorize());
    }
    for (s, t) in left {
        for (c, h) in hs.iter().enumerate() {
            cols[c].extend(s.mul(&h.matrix).vectorize());
        }
        rhs.extend(t.vectorize());
    }
    if rhs.is_empty() {
        return Some(Matrix::zeros(p, b.dim(), a.dim()));
    }
    if hs.is_empty() {
        return rhs.iter().all(|&x| x == 0).then(|| Matrix::zeros(p, b.dim(), a.dim()));
    }
    let sys = Matrix::from_cols(p, rhs.len(), &cols);
    let x = sys.solve(&Matrix::column_vector(p, &rhs))?;
    Some(ModuleMap::combination(a, b, &hs, &x.col(0)).matrix)
}

/// Λ is self-injective iff the dual of the regular module is projective over Λ^op.
pub fn is_self_injective(alg: &Arc<Algebra>) -> bool {
    is_projective(&Module::regular(alg).dual())
}

/// Does `f: m → n` factor through a projective module?
pub fn factors_through_projective(f: &ModuleMap) -> bool {
    if f.is_zero() {
        return true;
    }
    let cover = free_cover(&f.target);
    let hs = hom_space(&f.source, cover.middle());
    let comps: Vec<Matrix> = hs.iter().map(|h| cover.right.matrix.mul(&h.matrix)).collect();
    solve_in_span(&comps, &f.matrix).is_some()
}

/// Hom_Λ(m, n) together with the subspace of maps factoring through a projective.
#[derive(Clone, Debug)]
pub struct StableHom {
    pub total: Vec<ModuleMap>,
    pub factoring: Vec<ModuleMap>,
    /// Representatives of a basis of the quotient.
    pub complement: Vec<ModuleMap>,
}

impl StableHom {
    pub fn quotient_dim(&self) -> usize {
        self.complement.len()
    }
}

/// Split a total basis into a factoring-subspace basis and quotient representatives.
pub(crate) fn split_quotient(p: u32, rows: usize, total: &[Matrix], factoring_span: &[Matrix]) -> (Vec<usize>, Matrix) {
    let fac: Vec<Vec<u32>> = factoring_span.iter().map(|m| m.vectorize()).collect();
    let tot: Vec<Vec<u32>> = total.iter().map(|m| m.vectorize()).collect();
    let f = Matrix::from_cols(p, rows, &fac).column_space();
    let combined = Matrix::hstack(p, rows, &[&f, &Matrix::from_cols(p, rows, &tot)]);
    let red = combined.rref();
    let comp = red.pivots.iter().filter(|&&c| c >= f.cols()).map(|&c| c - f.cols()).collect();
    (comp, f)
}

pub fn stable_hom(m: &Module, n: &Module) -> StableHom {
    let total = hom_space(m, n);
    let cover = free_cover(n);
    let through: Vec<Matrix> =
        hom_space(m, cover.middle()).iter().map(|h| cover.right.matrix.mul(&h.matrix)).collect();
    let rows = m.dim() * n.dim();
    let tot: Vec<Matrix> = total.iter().map(|h| h.matrix.clone()).collect();
    let (comp, fbasis) = split_quotient(m.p(), rows, &tot, &through);
    let factoring = (0..fbasis.cols())
        .map(|c| ModuleMap::new_unchecked(m, n, Matrix::unvectorize(m.p(), n.dim(), m.dim(), &fbasis.col(c))))
        .collect();
    let complement = comp.iter().map(|&i| total[i].clone()).collect();
    StableHom { total, factoring, complement }
}

/// Maps spanning the maps `m → m` factoring through a projective.
fn projective_endo_span(m: &Module) -> Vec<Matrix> {
    let cover = free_cover(m);
    hom_space(m, cover.middle()).iter().map(|h| cover.right.matrix.mul(&h.matrix)).collect()
}

/// An inverse of `f` modulo maps factoring through projectives, by an exact solve.
pub fn stable_inverse(f: &ModuleMap) -> Option<ModuleMap> {
    let (m, n) = (&f.source, &f.target);
    let p = m.p();
    let hs = hom_space(n, m);
    let pm = projective_endo_span(m);
    let pn = projective_endo_span(n);
    let (rm, rn) = (m.dim() * m.dim(), n.dim() * n.dim());
    let ncols = hs.len() + pm.len() + pn.len();
    let mut a = Matrix::zeros(p, rm + rn, ncols);
    for (i, h) in hs.iter().enumerate() {
        let gf = h.matrix.mul(&f.matrix).vectorize();
        let fg = f.matrix.mul(&h.matrix).vectorize();
        for (r, &x) in gf.iter().enumerate() {
            a.set(r, i, x);
        }
        for (r, &x) in fg.iter().enumerate() {
            a.set(rm + r, i, x);
        }
    }
    for (j, b) in pm.iter().enumerate() {
        for (r, &x) in b.neg().vectorize().iter().enumerate() {
            a.set(r, hs.len() + j, x);
        }
    }
    for (k, c) in pn.iter().enumerate() {
        for (r, &x) in c.neg().vectorize().iter().enumerate() {
            a.set(rm + r, hs.len() + pm.len() + k, x);
        }
    }
    let mut rhs = Matrix::identity(p, m.dim()).vectorize();
    rhs.extend(Matrix::identity(p, n.dim()).vectorize());
    let x = a.solve(&Matrix::column_vector(p, &rhs))?;
    let coeffs: Vec<u32> = (0..hs.len()).map(|i| x.get(i, 0)).collect();
    Some(ModuleMap::combination(n, m, &hs, &coeffs))
}

/// Exact test: `f` is a stable isomorphism iff the kernel of the deflation
/// `(f, π): m ⊕ P(n) → n` is projective.
pub fn is_stable_iso_map(f: &ModuleMap) -> bool {
    let alg = f.source.alg().clone();
    let cover = free_cover(&f.target);
    let sum = Module::direct_sum_of(&alg, &[f.source.clone(), cover.middle().clone()]);
    let d = Matrix::hstack(alg.p(), f.target.dim(), &[&f.matrix, &cover.right.matrix]);
    let defl = ModuleMap::new_unchecked(&sum, &f.target, d);
    is_projective(&kernel(&defl).source)
}

/// Options for the budgeted stable-isomorphism search.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SearchBudget {
    pub budget: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { budget: 4096, seed: 0 }
    }
}

/// Three-valued verdict of a stable-isomorphism search.
#[derive(Clone, Debug)]
pub enum Verdict<W> {
    True(W),
    False(Certificate),
    Unknown { budget: usize, seed: u64, tried: usize },
}

impl<W> Verdict<W> {
    pub fn is_true(&self) -> bool {
        matches!(self, Verdict::True(_))
    }
    pub fn is_false(&self) -> bool {
        matches!(self, Verdict::False(_))
    }
    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::True(_) => "true",
            Verdict::False(_) => "false",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum Certificate {
    /// Stable dimensions (End(m), End(n), Hom(m,n), Hom(n,m)) that cannot all agree.
    DimensionObstruction { end_source: usize, end_target: usize, forward: usize, backward: usize },
    /// Every stable class of maps was tried.
    Exhausted { classes: u64 },
    /// A component of a diagram map is not a stable isomorphism.
    Component { object: String, detail: Option<Box<Certificate>> },
}

impl Certificate {
    pub fn describe(&self) -> String {
        match self {
            Certificate::DimensionObstruction { end_source, end_target, forward, backward } => format!(
                "dimension obstruction: stable dims End(source)={end_source}, End(target)={end_target}, \
                 Hom(source,target)={forward}, Hom(target,source)={backward} differ"
            ),
            Certificate::Exhausted { classes } => format!("exhaustive search over all {classes} nonzero stable classes failed"),
            Certificate::Component { object, detail } => match detail {
                Some(d) => format!("component at {object} is not a stable isomorphism ({})", d.describe()),
                None => format!("component at {object} is not a stable isomorphism"),
            },
        }
    }
}

/// Iterate candidate coefficient vectors: exhaustive when p^s - 1 ≤ budget,
/// otherwise seeded random sampling. `test` returns `Some` on success.
/// Returns (result, tried, exhaustive).
pub fn search_combinations<T>(
    p: u32,
    s: usize,
    budget: SearchBudget,
    mut test: impl FnMut(&[u32]) -> Option<T>,
) -> (Option<T>, usize, bool) {
    let total = (p as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if total.saturating_sub(1) <= budget.budget as u128 {
        let mut coeffs = vec![0u32; s];
        let mut tried = 0;
        for _ in 1..total {
            // increment little-endian counter
            for c in coeffs.iter_mut() {
                *c += 1;
                if *c == p {
                    *c = 0;
                } else {
                    break;
                }
            }
            tried += 1;
            if let Some(t) = test(&coeffs) {
                return (Some(t), tried, true);
            }
        }
        return (None, tried, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for tried in 1..=budget.budget {
        let coeffs: Vec<u32> = (0..s).map(|_| rng.gen_range(0..p)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        if let Some(t) = test(&coeffs) {
            return (Some(t), tried, false);
        }
    }
    (None, budget.budget, false)
}

/// Witness pair of a stable isomorphism.
#[derive(Clone, Debug)]
pub struct IsoWitness {
    pub forward: ModuleMap,
    pub backward: ModuleMap,
}

pub fn is_stable_iso(m: &Module, n: &Module, budget: SearchBudget) -> Verdict<IsoWitness> {
    let smn = stable_hom(m, n);
    let snm = stable_hom(n, m);
    let smm = stable_hom(m, m).quotient_dim();
    let snn = stable_hom(n, n).quotient_dim();
    let s = smn.quotient_dim();
    if !(smm == snn && snn == s && s == snm.quotient_dim()) {
        return Verdict::False(Certificate::DimensionObstruction {
            end_source: smm,
            end_target: snn,
            forward: s,
            backward: snm.quotient_dim(),
        });
    }
    if s == 0 {
        return Verdict::True(IsoWitness { forward: ModuleMap::zero(m, n), backward: ModuleMap::zero(n, m) });
    }
    if m == n {
        return Verdict::True(IsoWitness { forward: m.identity(), backward: m.identity() });
    }
    let reps = smn.complement;
    let (found, tried, exhaustive) = search_combinations(m.p(), s, budget, |c| {
        let f = ModuleMap::combination(m, n, &reps, c);
        stable_inverse(&f).map(|g| IsoWitness { forward: f, backward: g })
    });
    match found {
        Some(w) => Verdict::True(w),
        None if exhaustive => Verdict::False(Certificate::Exhausted { classes: tried as u64 }),
        None => Verdict::Unknown { budget: budget.budget, seed: budget.seed, tried },
    }
}

/// All module structures of dimension `d` (as action tuples) over a small
/// algebra, by brute force over the generator actions. Only for tiny sizes.
pub fn enumerate_modules(alg: &Arc<Algebra>, d: usize) -> Vec<Module> {
    let p = alg.p();
    let gens = alg.generators().to_vec();
    let cells = d * d * gens.len();
    let total = (p as u64).pow(cells as u32);
    assert!(total <= 1 << 20, "enumeration too large");
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut gmats = Vec::new();
        for _ in &gens {
            let mut m = Matrix::zeros(p, d, d);
            for r in 0..d {
                for col in 0..d {
                    m.set(r, col, (c % p as u64) as u32);
                    c /= p as u64;
                }
            }
            gmats.push(m);
        }
        if let Some(m) = module_from_generator_action(alg, &gens, &gmats, d) {
            out.push(m);
        }
    }
    out
}

/// Extend an action of the generators to all basis elements, if consistent.
fn module_from_generator_action(alg: &Arc<Algebra>, gens: &[usize], gmats: &[Matrix], d: usize) -> Option<Module> {
    let p = alg.p();
    let n = alg.dim();
    // Span words in generators; each basis element is expressed through words.
    let mut words: Vec<(Vec<u32>, Matrix)> = vec![(alg.unit().to_vec(), Matrix::identity(p, d))];
    let mut frontier = words.clone();
    for _ in 0..n {
        let mut next = Vec::new();
        for (elem, mat) in &frontier {
            for (gi, &g) in gens.iter().enumerate() {
                let e = alg.multiply(elem, &alg.basis_vector(g));
                // m·(elem·g) = (m·elem)·g
                next.push((e, gmats[gi].mul(mat)));
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    // Solve for the action of each basis element as a combination of words.
    let elems: Vec<Vec<u32>> = words.iter().map(|w| w.0.clone()).collect();
    let span = Matrix::from_cols(p, n, &elems);
    let mut action = Vec::new();
    for k in 0..n {
        let x = span.solve(&Matrix::column_vector(p, &alg.basis_vector(k)))?;
        let mut a = Matrix::zeros(p, d, d);
        for (w, (_, mat)) in words.iter().enumerate() {
            let c = x.get(w, 0);
            if c != 0 {
                a = a.add(&mat.scale(c as i64));
            }
        }
        action.push(a);
    }
    Module::new(alg, action).ok()
}
