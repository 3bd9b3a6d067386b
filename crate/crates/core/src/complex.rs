//! Unbounded complexes of diagrams, generated lazily and inspected on
//! finite windows. Cohomological grading: `d^k: C^k → C^{k+1}`.
//!
//! A window `[lo, hi]` materializes the terms `lo..=hi` and the
//! differentials `d^lo..d^{hi-1}`; exactness and contractibility are
//! checked at the interior degrees `lo+1..=hi-1`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::algebra::Algebra;
use crate::category::{shapes, Cat, CatFunctor};
use crate::diagram::{
    extend_by_zero, hom_space_diagrams, is_projective_diagram, projective_cover_diagram, sub_diagram, Diagram,
    DiagramConflation, DiagramFile, DiagramMap,
};
use crate::field::Matrix;
use crate::gorenstein::{embed_gproj_into_proj, is_gproj};
use crate::homotopy::strip_free_summands;
use crate::modules::{hom_space, is_projective, Module};
use crate::{Error, Result};

/// How the terms outside any stored data are obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    Bounded { lo: i64, hi: i64 },
    CompleteResolution,
    Periodic { period: usize },
    /// Built from other complexes (cone, shift, Kan extension, ...).
    Derived(String),
}

type TermGen = dyn Fn(i64) -> Result<Diagram> + Send + Sync;
type CompGen = dyn Fn(i64) -> Result<Vec<Matrix>> + Send + Sync;

struct Inner {
    shape: Cat,
    alg: Arc<Algebra>,
    support: Support,
    term: Box<TermGen>,
    diff: Box<CompGen>,
    terms: Mutex<BTreeMap<i64, Diagram>>,
    diffs: Mutex<BTreeMap<i64, DiagramMap>>,
    /// A preferred inclusion of the degree-0 cocycles, when the
    /// construction knows one (complete resolutions).
    cocycles0: Option<DiagramMap>,
}

/// A complex of diagrams over a fixed shape and algebra. Cloning shares
/// the memo table.
#[derive(Clone)]
pub struct LazyComplex(Arc<Inner>);

impl fmt::Debug for LazyComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyComplex")
            .field("shape", &self.0.shape.name())
            .field("support", &self.0.support)
            .field("memoized", &self.0.terms.lock().map(|t| t.len()).unwrap_or(0))
            .finish()
    }
}

fn sign(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

impl LazyComplex {
    /// `term(k)` must be deterministic; `diff(k)` returns the components of
    /// `d^k` object by object.
    pub fn from_generators(
        shape: &Cat,
        alg: &Arc<Algebra>,
        support: Support,
        term: impl Fn(i64) -> Result<Diagram> + Send + Sync + 'static,
        diff: impl Fn(i64) -> Result<Vec<Matrix>> + Send + Sync + 'static,
    ) -> LazyComplex {
        LazyComplex(Arc::new(Inner {
            shape: shape.clone(),
            alg: alg.clone(),
            support,
            term: Box::new(term),
            diff: Box::new(diff),
            terms: Mutex::new(BTreeMap::new()),
            diffs: Mutex::new(BTreeMap::new()),
            cocycles0: None,
        }))
    }

    fn with_cocycles0(self, inc: DiagramMap) -> LazyComplex {
        let inner = Arc::try_unwrap(self.0).unwrap_or_else(|_| unreachable!("fresh complex"));
        LazyComplex(Arc::new(Inner { cocycles0: Some(inc), ..inner }))
    }

    pub fn zero(shape: &Cat, alg: &Arc<Algebra>) -> LazyComplex {
        let z = Diagram::zero(shape, alg);
        let n = shape.n_objects();
        let p = alg.p();
        LazyComplex::from_generators(
            shape,
            alg,
            Support::Bounded { lo: 0, hi: -1 },
            move |_| Ok(z.clone()),
            move |_| Ok(vec![Matrix::zeros(p, 0, 0); n]),
        )
    }

    /// Terms `lo..lo+terms.len()`, zero outside; `diffs[t]` is `d^{lo+t}`.
    pub fn bounded(shape: &Cat, alg: &Arc<Algebra>, lo: i64, terms: Vec<Diagram>, diffs: Vec<DiagramMap>) -> Result<LazyComplex> {
        if terms.is_empty() {
            return Ok(LazyComplex::zero(shape, alg));
        }
        if diffs.len() + 1 != terms.len() {
            return Err(Error::Complex(format!("{} terms need {} differentials", terms.len(), terms.len() - 1)));
        }
        for (t, d) in diffs.iter().enumerate() {
            if d.source != terms[t] || d.target != terms[t + 1] {
                return Err(Error::Complex(format!("d^{} has the wrong source or target", lo + t as i64)));
            }
        }
        let hi = lo + terms.len() as i64 - 1;
        let zero = Diagram::zero(shape, alg);
        let p = alg.p();
        let ts = terms.clone();
        let get = move |k: i64| -> Diagram {
            if k < lo || k > hi {
                zero.clone()
            } else {
                ts[(k - lo) as usize].clone()
            }
        };
        let get2 = get.clone();
        let c = LazyComplex::from_generators(
            shape,
            alg,
            Support::Bounded { lo, hi },
            move |k| Ok(get(k)),
            move |k| {
                if k >= lo && k < hi {
                    Ok(diffs[(k - lo) as usize].comps.clone())
                } else {
                    let (s, t) = (get2(k), get2(k + 1));
                    Ok((0..s.shape().n_objects()).map(|i| Matrix::zeros(p, t.obj(i).dim(), s.obj(i).dim())).collect())
                }
            },
        );
        c.check_window(lo - 1, hi + 1)?;
        Ok(c)
    }

    /// `C^k = terms[k mod n]`, `d^k = diffs[k mod n]` (the last one wraps to `terms[0]`).
    pub fn periodic(shape: &Cat, alg: &Arc<Algebra>, terms: Vec<Diagram>, diffs: Vec<DiagramMap>) -> Result<LazyComplex> {
        let n = terms.len();
        if n == 0 || diffs.len() != n {
            return Err(Error::Complex("a periodic complex needs one differential per term".into()));
        }
        for (t, d) in diffs.iter().enumerate() {
            if d.source != terms[t] || d.target != terms[(t + 1) % n] {
                return Err(Error::Complex(format!("periodic d^{t} has the wrong source or target")));
            }
        }
        let c = LazyComplex::from_generators(
            shape,
            alg,
            Support::Periodic { period: n },
            move |k| Ok(terms[k.rem_euclid(n as i64) as usize].clone()),
            move |k| Ok(diffs[k.rem_euclid(n as i64) as usize].comps.clone()),
        );
        c.check_window(0, n as i64 + 1)?;
        Ok(c)
    }

    pub fn shape(&self) -> &Cat {
        &self.0.shape
    }

    pub fn alg(&self) -> &Arc<Algebra> {
        &self.0.alg
    }

    pub fn support(&self) -> &Support {
        &self.0.support
    }

    pub fn p(&self) -> u32 {
        self.0.alg.p()
    }

    pub fn term(&self, k: i64) -> Result<Diagram> {
        if let Some(t) = self.0.terms.lock().expect("memo").get(&k) {
            return Ok(t.clone());
        }
        let t = (self.0.term)(k)?;
        if t.shape().n_morphisms() != self.0.shape.n_morphisms() {
            return Err(Error::Complex(format!("term {k} lives on another shape")));
        }
        self.0.terms.lock().expect("memo").insert(k, t.clone());
        Ok(t)
    }

    pub fn diff(&self, k: i64) -> Result<DiagramMap> {
        if let Some(d) = self.0.diffs.lock().expect("memo").get(&k) {
            return Ok(d.clone());
        }
        let (s, t) = (self.term(k)?, self.term(k + 1)?);
        let comps = (self.0.diff)(k)?;
        check_comps(&s, &t, &comps).map_err(|e| Error::Complex(format!("d^{k}: {e}")))?;
        let d = DiagramMap::new_unchecked(&s, &t, comps);
        self.0.diffs.lock().expect("memo").insert(k, d.clone());
        Ok(d)
    }

    /// Naturality of `d^lo..d^{hi-1}` and `d∘d = 0` inside the window.
    pub fn check_window(&self, lo: i64, hi: i64) -> Result<()> {
        for k in lo..hi {
            let d = self.diff(k)?;
            if let Some(f) = d.naturality_failure() {
                return Err(Error::Complex(format!("d^{k} is not natural at morphism {}", self.0.shape.morphism(f).name)));
            }
        }
        for k in lo..hi - 1 {
            if !self.diff(k + 1)?.after(&self.diff(k)?).is_zero() {
                return Err(Error::Complex(format!("d^{} d^{} is not zero", k + 1, k)));
            }
        }
        Ok(())
    }

    /// Exactness at the interior degrees, object by object.
    pub fn is_acyclic_on(&self, lo: i64, hi: i64) -> Result<bool> {
        self.check_window(lo, hi)?;
        for k in lo + 1..hi {
            let (a, b, t) = (self.diff(k - 1)?, self.diff(k)?, self.term(k)?);
            for i in 0..self.0.shape.n_objects() {
                if a.comps[i].rank() + b.comps[i].rank() != t.obj(i).dim() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Every component of every term in the window is a projective module.
    pub fn is_termwise_projective_on(&self, lo: i64, hi: i64) -> Result<bool> {
        for k in lo..=hi {
            let t = self.term(k)?;
            if !t.objects().iter().all(is_projective) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every term in the window is a projective diagram.
    pub fn has_projective_terms_on(&self, lo: i64, hi: i64) -> Result<bool> {
        for k in lo..=hi {
            if !is_projective_diagram(&self.term(k)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Inclusion `Z^k → C^k` of the cocycles.
    pub fn cocycles(&self, k: i64) -> Result<DiagramMap> {
        if k == 0 {
            if let Some(inc) = &self.0.cocycles0 {
                return Ok(inc.clone());
            }
        }
        let d = self.diff(k)?;
        let bases: Vec<Matrix> = d.comps.iter().map(|c| c.kernel_basis()).collect();
        sub_diagram(&d.source, &bases)
    }

    /// `C[n]^k = C^{k+n}` with differential `(-1)^n d`.
    pub fn shift(&self, n: i64) -> LazyComplex {
        let (a, b) = (self.clone(), self.clone());
        LazyComplex::from_generators(
            self.shape(),
            self.alg(),
            Support::Derived(format!("shift {n}")),
            move |k| a.term(k + n),
            move |k| Ok(b.diff(k + n)?.scale(sign(n)).comps),
        )
    }

    pub fn direct_sum(&self, other: &LazyComplex) -> LazyComplex {
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        let p = self.p();
        LazyComplex::from_generators(
            self.shape(),
            self.alg(),
            Support::Derived("sum".into()),
            move |k| Ok(a.term(k)?.sum2(&b.term(k)?)),
            move |k| {
                let (da, db) = (a2.diff(k)?, b2.diff(k)?);
                Ok(da.comps.iter().zip(&db.comps).map(|(x, y)| Matrix::block_diag(p, &[x, y])).collect())
            },
        )
    }

    /// `u^* C`, termwise.
    pub fn restrict(&self, u: &CatFunctor) -> LazyComplex {
        let (a, b) = (self.clone(), self.clone());
        let (u1, u2) = (u.clone(), u.clone());
        LazyComplex::from_generators(
            &u.source,
            self.alg(),
            Support::Derived("restriction".into()),
            move |k| Ok(a.term(k)?.restrict(&u1)),
            move |k| Ok(b.diff(k)?.restrict(&u2).comps),
        )
    }

    /// Extension by zero along an object-injective full functor, termwise.
    pub fn extend_by_zero(&self, u: &CatFunctor) -> LazyComplex {
        let (a, b) = (self.clone(), self.clone());
        let (u1, u2) = (u.clone(), u.clone());
        let p = self.p();
        LazyComplex::from_generators(
            &u.target,
            self.alg(),
            Support::Derived("extension by zero".into()),
            move |k| extend_by_zero(&u1, &a.term(k)?),
            move |k| {
                let d = b.diff(k)?;
                Ok((0..u2.target.n_objects())
                    .map(|j| match u2.preimage(j) {
                        Some(i) => d.comps[i].clone(),
                        None => Matrix::zeros(p, 0, 0),
                    })
                    .collect())
            },
        )
    }

    /// Termwise linear dual placed on `shape` (the opposite shape) and the
    /// opposite algebra: `(DC)^k = D(C^{-k})`, `d^k = (d^{-k-1})^T`.
    pub fn dual_onto(&self, shape: &Cat, op_alg: &Arc<Algebra>) -> LazyComplex {
        let (a, b) = (self.clone(), self.clone());
        let (s1, al) = (shape.clone(), op_alg.clone());
        LazyComplex::from_generators(
            shape,
            op_alg,
            Support::Derived("dual".into()),
            move |k| Ok(a.term(-k)?.dual_onto(&s1, &al)),
            move |k| Ok(b.diff(-k - 1)?.comps.iter().map(|m| m.transpose()).collect()),
        )
    }

    /// A bounded copy of the window, for files and reports.
    pub fn to_file(&self, lo: i64, hi: i64) -> Result<ComplexFile> {
        let mut terms = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        for k in lo..=hi {
            terms.insert(k.to_string(), self.term(k)?.to_file());
        }
        for k in lo..hi {
            let d = self.diff(k)?;
            let comps = (0..self.shape().n_objects())
                .map(|i| (self.shape().objects()[i].clone(), to_rows(&d.comps[i])))
                .collect();
            diffs.insert(k.to_string(), comps);
        }
        Ok(ComplexFile { shape: self.shape().name().to_string(), terms, diffs, policy: PolicyFile::ZeroTails })
    }
}

fn to_rows(m: &Matrix) -> Vec<Vec<i64>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect()
}

fn check_comps(s: &Diagram, t: &Diagram, comps: &[Matrix]) -> std::result::Result<(), String> {
    if comps.len() != s.shape().n_objects() {
        return Err(format!("{} components for {} objects", comps.len(), s.shape().n_objects()));
    }
    for (i, c) in comps.iter().enumerate() {
        if c.shape() != (t.obj(i).dim(), s.obj(i).dim()) {
            return Err(format!("component {i} has shape {:?}", c.shape()));
        }
    }
    Ok(())
}

/// Degree-0 cocycles. Asserts Gorenstein projectivity when the window
/// `-1..1` is exact with projective-diagram terms.
pub fn z0(c: &LazyComplex) -> Result<Diagram> {
    c.check_window(-1, 1)?;
    let z = c.cocycles(0)?.source;
    if c.is_acyclic_on(-1, 1)? && c.has_projective_terms_on(-1, 1)? && !is_gproj(&z) {
        return Err(Error::Construction("cocycles of an acyclic complex of projective diagrams are not GProj".into()));
    }
    Ok(z)
}

struct MapInner {
    source: LazyComplex,
    target: LazyComplex,
    comp: Box<CompGen>,
    memo: Mutex<BTreeMap<i64, DiagramMap>>,
}

/// A chain map, one natural transformation per degree.
#[derive(Clone)]
pub struct ComplexMap(Arc<MapInner>);

impl fmt::Debug for ComplexMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexMap").field("source", &self.0.source).field("target", &self.0.target).finish()
    }
}

impl ComplexMap {
    pub fn from_generator(
        source: &LazyComplex,
        target: &LazyComplex,
        comp: impl Fn(i64) -> Result<Vec<Matrix>> + Send + Sync + 'static,
    ) -> ComplexMap {
        ComplexMap(Arc::new(MapInner {
            source: source.clone(),
            target: target.clone(),
            comp: Box::new(comp),
            memo: Mutex::new(BTreeMap::new()),
        }))
    }

    /// Given components on degrees `lo..lo+maps.len()`, zero elsewhere.
    pub fn from_window(source: &LazyComplex, target: &LazyComplex, lo: i64, maps: Vec<DiagramMap>) -> ComplexMap {
        let (s, t) = (source.clone(), target.clone());
        ComplexMap::from_generator(source, target, move |k| {
            if k >= lo && ((k - lo) as usize) < maps.len() {
                Ok(maps[(k - lo) as usize].comps.clone())
            } else {
                Ok(DiagramMap::zero(&s.term(k)?, &t.term(k)?).comps)
            }
        })
    }

    pub fn identity(c: &LazyComplex) -> ComplexMap {
        let c2 = c.clone();
        ComplexMap::from_generator(c, c, move |k| Ok(DiagramMap::identity(&c2.term(k)?).comps))
    }

    pub fn zero(s: &LazyComplex, t: &LazyComplex) -> ComplexMap {
        ComplexMap::from_window(s, t, 0, Vec::new())
    }

    pub fn source(&self) -> &LazyComplex {
        &self.0.source
    }

    pub fn target(&self) -> &LazyComplex {
        &self.0.target
    }

    pub fn at(&self, k: i64) -> Result<DiagramMap> {
        if let Some(m) = self.0.memo.lock().expect("memo").get(&k) {
            return Ok(m.clone());
        }
        let (s, t) = (self.0.source.term(k)?, self.0.target.term(k)?);
        let comps = (self.0.comp)(k)?;
        check_comps(&s, &t, &comps).map_err(|e| Error::Complex(format!("chain map in degree {k}: {e}")))?;
        let m = DiagramMap::new_unchecked(&s, &t, comps);
        self.0.memo.lock().expect("memo").insert(k, m.clone());
        Ok(m)
    }

    /// `self ∘ g`.
    pub fn after(&self, g: &ComplexMap) -> ComplexMap {
        let (f, g2) = (self.clone(), g.clone());
        ComplexMap::from_generator(g.source(), self.target(), move |k| Ok(f.at(k)?.after(&g2.at(k)?).comps))
    }

    pub fn restrict(&self, u: &CatFunctor) -> ComplexMap {
        let f = self.clone();
        let u2 = u.clone();
        ComplexMap::from_generator(&self.source().restrict(u), &self.target().restrict(u), move |k| {
            Ok(f.at(k)?.restrict(&u2).comps)
        })
    }

    /// Naturality in each degree and commuting squares `d f^k = f^{k+1} d` for `k` in `lo..hi`.
    pub fn check_window(&self, lo: i64, hi: i64) -> Result<()> {
        for k in lo..=hi {
            if !self.at(k)?.is_natural() {
                return Err(Error::Complex(format!("chain map component {k} is not natural")));
            }
        }
        for k in lo..hi {
            let left = self.0.target.diff(k)?.after(&self.at(k)?);
            let right = self.at(k + 1)?.after(&self.0.source.diff(k)?);
            if left != right {
                return Err(Error::Complex(format!("chain map square in degree {k} does not commute")));
            }
        }
        Ok(())
    }
}

fn block2(p: u32, rows: [usize; 2], cols: [usize; 2], blocks: [[Option<Matrix>; 2]; 2]) -> Matrix {
    let mut m = Matrix::zeros(p, rows[0] + rows[1], cols[0] + cols[1]);
    let r0 = [0, rows[0]];
    let c0 = [0, cols[0]];
    for (a, row) in blocks.iter().enumerate() {
        for (b, blk) in row.iter().enumerate() {
            if let Some(x) = blk {
                m.set_block(r0[a], c0[b], x);
            }
        }
    }
    m
}

/// `cone(f)^k = T^k ⊕ S^{k+1}` with `d = [[d_T, f],[0, -d_S]]`.
pub fn cone(f: &ComplexMap) -> LazyComplex {
    let (s, t) = (f.source().clone(), f.target().clone());
    let (s2, t2, f2) = (s.clone(), t.clone(), f.clone());
    let p = s.p();
    let (shape, alg) = (s.shape().clone(), s.alg().clone());
    LazyComplex::from_generators(
        &shape,
        &alg,
        Support::Derived("cone".into()),
        move |k| Ok(t.term(k)?.sum2(&s.term(k + 1)?)),
        move |k| {
            let (dt, ds, fk) = (t2.diff(k)?, s2.diff(k + 1)?, f2.at(k + 1)?);
            Ok((0..dt.comps.len())
                .map(|i| {
                    let rows = [dt.comps[i].rows(), ds.comps[i].rows()];
                    let cols = [dt.comps[i].cols(), ds.comps[i].cols()];
                    block2(p, rows, cols, [[Some(dt.comps[i].clone()), Some(fk.comps[i].clone())], [None, Some(ds.comps[i].neg())]])
                })
                .collect())
        },
    )
}

/// `i_!` of a complex of modules (a complex over the point).
pub fn free_complex(shape: &Cat, i: usize, m: &LazyComplex) -> LazyComplex {
    let (a, b) = (m.clone(), m.clone());
    let (s1, s2) = (shape.clone(), shape.clone());
    let p = m.p();
    LazyComplex::from_generators(
        shape,
        m.alg(),
        Support::Derived(format!("free at {}", shape.objects()[i])),
        move |k| Ok(Diagram::free_at(&s1, i, a.term(k)?.obj(0))),
        move |k| {
            let d = b.diff(k)?.comps[0].clone();
            Ok((0..s2.n_objects()).map(|c| Matrix::block_diag(p, &vec![&d; s2.hom(i, c).len()])).collect())
        },
    )
}

/// The counit `i_! i^* x → x`.
fn free_counit(free: &LazyComplex, x: &LazyComplex, i: usize) -> ComplexMap {
    let x2 = x.clone();
    let shape = x.shape().clone();
    let p = x.p();
    ComplexMap::from_generator(free, x, move |k| {
        let t = x2.term(k)?;
        Ok((0..shape.n_objects())
            .map(|c| {
                let blocks: Vec<&Matrix> = shape.hom(i, c).iter().map(|&f| t.matrix(f)).collect();
                Matrix::hstack(p, t.obj(c).dim(), &blocks)
            })
            .collect())
    })
}

struct Resolution {
    x: Diagram,
    covers: Vec<DiagramConflation>,
    embeds: Vec<DiagramConflation>,
}

impl Resolution {
    fn cover(&mut self, n: usize) -> DiagramConflation {
        while self.covers.len() <= n {
            let src = self.covers.last().map(|c| c.first().clone()).unwrap_or_else(|| self.x.clone());
            self.covers.push(projective_cover_diagram(&src));
        }
        self.covers[n].clone()
    }

    fn embed(&mut self, n: usize) -> Result<DiagramConflation> {
        while self.embeds.len() <= n {
            let src = self.embeds.last().map(|c| c.last().clone()).unwrap_or_else(|| self.x.clone());
            self.embeds.push(embed_gproj_into_proj(&src)?);
        }
        Ok(self.embeds[n].clone())
    }
}

/// Complete resolution of a Gorenstein projective diagram: projective covers
/// to the left of degree 0, projective embeddings from degree 0 on. The
/// degree-0 cocycles are `x` itself, embedded by the first inflation.
pub fn complete_resolution(x: &Diagram) -> Result<LazyComplex> {
    if !is_gproj(x) {
        return Err(Error::Precondition("complete_resolution needs a GProj diagram".into()));
    }
    let state = Arc::new(Mutex::new(Resolution { x: x.clone(), covers: Vec::new(), embeds: Vec::new() }));
    let first = state.lock().expect("resolution").embed(0)?;
    let (st1, st2) = (state.clone(), state);
    let c = LazyComplex::from_generators(
        x.shape(),
        x.alg(),
        Support::CompleteResolution,
        move |k| {
            let mut s = st1.lock().expect("resolution");
            if k < 0 {
                Ok(s.cover((-k - 1) as usize).middle().clone())
            } else {
                Ok(s.embed(k as usize)?.middle().clone())
            }
        },
        move |k| {
            let mut s = st2.lock().expect("resolution");
            let d = if k <= -2 {
                let n = (-k - 1) as usize;
                s.cover(n - 1).left.after(&s.cover(n).right)
            } else if k == -1 {
                s.embed(0)?.left.after(&s.cover(0).right)
            } else {
                let n = k as usize;
                s.embed(n + 1)?.left.after(&s.embed(n)?.right)
            };
            Ok(d.comps)
        },
    );
    Ok(c.with_cocycles0(first.left))
}

/// Solve `d^{k-1} h^k + h^{k+1} d^k = 1` for `k` in the interior of the
/// window. `bases[k - lo - 1]` spans the allowed maps `C^k → C^{k-1}` as
/// lists of per-object matrices; `diffs[k - lo]` holds `d^k` per object.
fn contraction_exists(p: u32, lo: i64, hi: i64, dims: &[Vec<usize>], diffs: &[Vec<Matrix>], bases: &[Vec<Vec<Matrix>>]) -> bool {
    let n_obj = dims[0].len();
    // Equation rows: for interior k and object o, a dims×dims block.
    let mut eq_off = BTreeMap::new();
    let mut rows = 0;
    for k in lo + 1..hi {
        for o in 0..n_obj {
            eq_off.insert((k, o), rows);
            let d = dims[(k - lo) as usize][o];
            rows += d * d;
        }
    }
    if rows == 0 {
        return true;
    }
    let mut cols: Vec<Vec<u32>> = Vec::new();
    for k in lo + 1..=hi {
        for b in &bases[(k - lo - 1) as usize] {
            let mut col = vec![0u32; rows];
            for o in 0..n_obj {
                // h^k enters the equation at k as d^{k-1} h^k ...
                if k < hi {
                    let v = diffs[(k - 1 - lo) as usize][o].mul(&b[o]).vectorize();
                    let off = eq_off[&(k, o)];
                    for (t, x) in v.into_iter().enumerate() {
                        col[off + t] = (col[off + t] + x) % p;
                    }
                }
                // ... and at k-1 as h^k d^{k-1}.
                if k - 1 > lo {
                    let v = b[o].mul(&diffs[(k - 1 - lo) as usize][o]).vectorize();
                    let off = eq_off[&(k - 1, o)];
                    for (t, x) in v.into_iter().enumerate() {
                        col[off + t] = (col[off + t] + x) % p;
                    }
                }
            }
            cols.push(col);
        }
    }
    let mut rhs = vec![0u32; rows];
    for k in lo + 1..hi {
        for o in 0..n_obj {
            let d = dims[(k - lo) as usize][o];
            let v = Matrix::identity(p, d).vectorize();
            let off = eq_off[&(k, o)];
            rhs[off..off + d * d].copy_from_slice(&v);
        }
    }
    if cols.is_empty() {
        return rhs.iter().all(|&x| x == 0);
    }
    Matrix::from_cols(p, rows, &cols).solve(&Matrix::column_vector(p, &rhs)).is_some()
}

/// Both contractibility tests on a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContractibilityReport {
    pub window: (i64, i64),
    /// All component cocycles at interior degrees are projective.
    pub projective_cocycles: bool,
    /// Every component admits a Λ-linear contraction on the window.
    pub contraction_found: bool,
}

pub fn termwise_contractibility(c: &LazyComplex, lo: i64, hi: i64) -> Result<ContractibilityReport> {
    if !c.is_acyclic_on(lo, hi)? {
        return Err(Error::Precondition(format!("complex is not acyclic on [{lo}, {hi}]")));
    }
    let n = c.shape().n_objects();
    let p = c.p();
    let mut projective_cocycles = true;
    for k in lo + 1..hi {
        let z = c.cocycles(k)?.source;
        projective_cocycles &= z.objects().iter().all(is_projective);
    }
    let terms: Vec<Diagram> = (lo..=hi).map(|k| c.term(k)).collect::<Result<_>>()?;
    let diffs: Vec<DiagramMap> = (lo..hi).map(|k| c.diff(k)).collect::<Result<_>>()?;
    let mut contraction_found = true;
    for o in 0..n {
        let dims: Vec<Vec<usize>> = terms.iter().map(|t| vec![t.obj(o).dim()]).collect();
        let ds: Vec<Vec<Matrix>> = diffs.iter().map(|d| vec![d.comps[o].clone()]).collect();
        let bases: Vec<Vec<Vec<Matrix>>> = (lo + 1..=hi)
            .map(|k| {
                let (s, t) = (terms[(k - lo) as usize].obj(o), terms[(k - lo - 1) as usize].obj(o));
                hom_space(s, t).into_iter().map(|h| vec![h.matrix]).collect()
            })
            .collect();
        if !contraction_exists(p, lo, hi, &dims, &ds, &bases) {
            contraction_found = false;
            break;
        }
    }
    Ok(ContractibilityReport { window: (lo, hi), projective_cocycles, contraction_found })
}

/// Projective-cocycle criterion, cross-checked against the contraction
/// search; disagreement is an error.
pub fn is_termwise_contractible(c: &LazyComplex, lo: i64, hi: i64) -> Result<bool> {
    let r = termwise_contractibility(c, lo, hi)?;
    if r.projective_cocycles != r.contraction_found {
        return Err(Error::Construction(format!(
            "contractibility tests disagree on [{lo}, {hi}]: cocycle criterion {}, contraction search {}",
            r.projective_cocycles, r.contraction_found
        )));
    }
    Ok(r.projective_cocycles)
}

/// A natural contraction exists on the window (contractible as a complex
/// of diagrams, not just componentwise).
pub fn is_contractible_on(c: &LazyComplex, lo: i64, hi: i64) -> Result<bool> {
    c.check_window(lo, hi)?;
    let p = c.p();
    let terms: Vec<Diagram> = (lo..=hi).map(|k| c.term(k)).collect::<Result<_>>()?;
    let diffs: Vec<Vec<Matrix>> = (lo..hi).map(|k| c.diff(k).map(|d| d.comps)).collect::<Result<_>>()?;
    let dims: Vec<Vec<usize>> = terms.iter().map(|t| t.dims()).collect();
    let mut bases = Vec::new();
    for k in lo + 1..=hi {
        let hs = hom_space_diagrams(&terms[(k - lo) as usize], &terms[(k - lo - 1) as usize])?;
        bases.push(hs.into_iter().map(|h| h.comps).collect());
    }
    Ok(contraction_exists(p, lo, hi, &dims, &diffs, &bases))
}

/// `x_p → x → x_tc` with `x_p` a complex of projective diagrams and `x_tc`
/// termwise contractible.
#[derive(Clone, Debug)]
pub struct Sod {
    pub xp: LazyComplex,
    pub xtc: LazyComplex,
    /// `x_p → x`; `x_tc` is its cone.
    pub to_x: ComplexMap,
}

/// Window checks of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SodReport {
    pub window: (i64, i64),
    pub chain_map: bool,
    pub xp_projective_terms: bool,
    pub xtc_termwise_contractible: bool,
    /// Every map from the degree-0 cocycles of x_p to those of x_tc factors
    /// through a projective diagram.
    pub orthogonal: bool,
}

impl SodReport {
    pub fn passed(&self) -> bool {
        self.chain_map && self.xp_projective_terms && self.xtc_termwise_contractible && self.orthogonal
    }
}

impl Sod {
    pub fn verify(&self, lo: i64, hi: i64) -> Result<SodReport> {
        let chain_map = self.to_x.check_window(lo, hi).is_ok();
        let xp_projective_terms = self.xp.has_projective_terms_on(lo, hi)?;
        let xtc_termwise_contractible = is_termwise_contractible(&self.xtc, lo, hi)?;
        let zp = strip_free_summands(&z0(&self.xp)?)?;
        let ztc = self.xtc.cocycles(0)?.source;
        let orthogonal = stable_hom_vanishes(&zp, &ztc)?;
        Ok(SodReport { window: (lo, hi), chain_map, xp_projective_terms, xtc_termwise_contractible, orthogonal })
    }
}

/// Every map x → y factors through the projective cover of y.
fn stable_hom_vanishes(x: &Diagram, y: &Diagram) -> Result<bool> {
    let total = hom_space_diagrams(x, y)?;
    if total.is_empty() {
        return Ok(true);
    }
    let cov = projective_cover_diagram(y);
    let cols: Vec<Vec<u32>> = hom_space_diagrams(x, cov.middle())?.iter().map(|h| cov.right.after(h).vectorize()).collect();
    let rows = total[0].vectorize().len();
    Ok(!cols.is_empty() && Matrix::from_cols(x.p(), rows, &cols).rank() == total.len())
}

/// Recursion on a minimal object i with complement k: I' ↪ I (a cosieve).
/// With P = i_! i^* x, ε: P → x the counit and y = cone(ε), decompose
/// k^* y recursively as y_p' → k^* y and let Z = k_! y_p' with g: Z → y the
/// transpose, split as (g_x, g_P) along y = x ⊕ P[1]. Then
/// x_p = P ⊕ Z with d = [[d_P, -g_P],[0, d_Z]] and x_p → x is (ε, g_x).
pub fn sod_decompose(x: &LazyComplex) -> Result<Sod> {
    let shape = x.shape().clone();
    let alg = x.alg().clone();
    let n = shape.n_objects();
    if n == 0 {
        let id = ComplexMap::identity(x);
        return Ok(Sod { xp: x.clone(), xtc: cone(&id), to_x: id });
    }
    let i = shape.objects_by_degree()[0];
    let xi = x.restrict(&CatFunctor::object(&shape, i));
    let pc = free_complex(&shape, i, &xi);
    let eps = free_counit(&pc, x, i);
    let y = cone(&eps);
    let rest: Vec<usize> = (0..n).filter(|&o| o != i).collect();
    let (z, g) = if rest.is_empty() {
        let z = LazyComplex::zero(&shape, &alg);
        let g = ComplexMap::zero(&z, &y);
        (z, g)
    } else {
        let (_, k) = shapes::full_subcategory(&shape, &rest);
        let inner = sod_decompose(&y.restrict(&k))?;
        let z = inner.xp.extend_by_zero(&k);
        let (y2, k2, to) = (y.clone(), k.clone(), inner.to_x.clone());
        let p = alg.p();
        let g = ComplexMap::from_generator(&z, &y, move |deg| {
            let yk = y2.term(deg)?;
            let m = to.at(deg)?;
            Ok((0..yk.shape().n_objects())
                .map(|c| match k2.preimage(c) {
                    Some(a) => m.comps[a].clone(),
                    None => Matrix::zeros(p, yk.obj(c).dim(), 0),
                })
                .collect())
        });
        (z, g)
    };
    let p = alg.p();
    let split = {
        let (x2, g2) = (x.clone(), g.clone());
        move |deg: i64| -> Result<(Vec<Matrix>, Vec<Matrix>)> {
            let xk = x2.term(deg)?;
            let gk = g2.at(deg)?;
            let mut gx = Vec::new();
            let mut gp = Vec::new();
            for (c, m) in gk.comps.iter().enumerate() {
                let r = xk.obj(c).dim();
                gx.push(m.block(0, 0, r, m.cols()));
                gp.push(m.block(r, 0, m.rows() - r, m.cols()));
            }
            Ok((gx, gp))
        }
    };
    let split2 = split.clone();
    let (pc1, z1, pc2, z2) = (pc.clone(), z.clone(), pc.clone(), z.clone());
    let xp = LazyComplex::from_generators(
        &shape,
        &alg,
        Support::Derived(format!("projective part, split at {}", shape.objects()[i])),
        move |k| Ok(pc1.term(k)?.sum2(&z1.term(k)?)),
        move |k| {
            let (dp, dz) = (pc2.diff(k)?, z2.diff(k)?);
            let (_, gp) = split(k)?;
            Ok((0..dp.comps.len())
                .map(|c| {
                    let rows = [dp.comps[c].rows(), dz.comps[c].rows()];
                    let cols = [dp.comps[c].cols(), dz.comps[c].cols()];
                    block2(p, rows, cols, [[Some(dp.comps[c].clone()), Some(gp[c].neg())], [None, Some(dz.comps[c].clone())]])
                })
                .collect())
        },
    );
    let eps2 = eps.clone();
    let to_x = ComplexMap::from_generator(&xp, x, move |k| {
        let e = eps2.at(k)?;
        let (gx, _) = split2(k)?;
        Ok(e.comps
            .iter()
            .zip(&gx)
            .map(|(a, b)| Matrix::hstack(p, a.rows(), &[a, b]))
            .collect())
    });
    let xtc = cone(&to_x);
    Ok(Sod { xp, xtc, to_x })
}

/// Periodic or zero-tailed tails of a complex file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyFile {
    #[default]
    ZeroTails,
    Periodic { period: usize },
}

/// `{"shape", "terms": {degree: diagram}, "diffs": {degree: {object: rows}}, "policy"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexFile {
    pub shape: String,
    pub terms: BTreeMap<String, DiagramFile>,
    #[serde(default)]
    pub diffs: BTreeMap<String, BTreeMap<String, Vec<Vec<i64>>>>,
    #[serde(default)]
    pub policy: PolicyFile,
}

fn parse_degree(s: &str) -> Result<i64> {
    s.trim().parse().map_err(|_| Error::Input(format!("degree '{s}' is not an integer")))
}

impl ComplexFile {
    pub fn load(&self, shape: &Cat, alg: &Arc<Algebra>) -> Result<LazyComplex> {
        if self.shape != shape.name() {
            return Err(Error::Input(format!("complex is over '{}', not '{}'", self.shape, shape.name())));
        }
        let mut terms = BTreeMap::new();
        for (k, d) in &self.terms {
            terms.insert(parse_degree(k)?, Diagram::from_file(d, shape, alg)?);
        }
        let Some((&lo, _)) = terms.iter().next() else {
            return Ok(LazyComplex::zero(shape, alg));
        };
        let hi = *terms.keys().last().expect("nonempty");
        let zero = Diagram::zero(shape, alg);
        let ts: Vec<Diagram> = (lo..=hi).map(|k| terms.get(&k).cloned().unwrap_or_else(|| zero.clone())).collect();
        let n = ts.len();
        let periodic = matches!(self.policy, PolicyFile::Periodic { .. });
        if let PolicyFile::Periodic { period } = self.policy {
            if period != n || lo != 0 {
                return Err(Error::Input(format!("periodic complex needs terms 0..{period}")));
            }
        }
        let n_diffs = if periodic { n } else { n - 1 };
        let mut diffs = Vec::new();
        for t in 0..n_diffs {
            let (s, tg) = (&ts[t], &ts[(t + 1) % n]);
            let given = self.diffs.get(&(lo + t as i64).to_string());
            let comps = (0..shape.n_objects())
                .map(|o| {
                    let (r, c) = (tg.obj(o).dim(), s.obj(o).dim());
                    match given.and_then(|m| m.get(&shape.objects()[o])) {
                        Some(rows) => Matrix::from_rows(alg.p(), r, c, rows),
                        None => Ok(Matrix::zeros(alg.p(), r, c)),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            diffs.push(DiagramMap::new(s, tg, comps)?);
        }
        if periodic {
            LazyComplex::periodic(shape, alg, ts, diffs)
        } else {
            LazyComplex::bounded(shape, alg, lo, ts, diffs)
        }
    }
}

/// Complex of modules over the point.
pub fn module_complex(alg: &Arc<Algebra>, lo: i64, terms: Vec<Module>, diffs: Vec<Matrix>) -> Result<LazyComplex> {
    let e = shapes::point();
    let ts: Vec<Diagram> = terms.iter().map(|m| Diagram::constant(&e, m)).collect();
    let ds = diffs
        .into_iter()
        .enumerate()
        .map(|(t, d)| DiagramMap::new(&ts[t], &ts[t + 1], vec![d]))
        .collect::<Result<Vec<_>>>()?;
    LazyComplex::bounded(&e, alg, lo, ts, ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::standard::dual_numbers;

    fn k_over_e() -> (Arc<Algebra>, Diagram) {
        let alg = dual_numbers(2);
        let k = Module::trivial(&alg, 1).unwrap();
        (alg, Diagram::constant(&shapes::point(), &k))
    }

    #[test]
    fn resolution_of_k_is_two_periodic() {
        let (_, x) = k_over_e();
        let c = complete_resolution(&x).unwrap();
        assert!(c.is_acyclic_on(-4, 4).unwrap());
        for k in -4..4 {
            assert_eq!(c.term(k).unwrap().dims(), vec![2]);
            // multiplication by x has rank one and squares to zero
            let d = c.diff(k).unwrap();
            assert_eq!(d.comps[0].rank(), 1);
        }
        assert_eq!(z0(&c).unwrap(), x);
        assert!(!is_termwise_contractible(&c, -3, 3).unwrap());
    }

    #[test]
    fn projective_input_gives_contractible_resolution() {
        let alg = dual_numbers(2);
        let x = Diagram::constant(&shapes::point(), &Module::regular(&alg));
        let c = complete_resolution(&x).unwrap();
        assert!(c.term(-2).unwrap().is_zero() && c.term(1).unwrap().is_zero());
        assert!(c.diff(-1).unwrap().is_iso());
        assert!(is_termwise_contractible(&c, -3, 3).unwrap());
    }

    #[test]
    fn shifts_and_cones() {
        let (_, x) = k_over_e();
        let c = complete_resolution(&x).unwrap();
        let back = c.shift(1).shift(-1);
        for k in -2..2 {
            assert_eq!(back.term(k).unwrap(), c.term(k).unwrap());
            assert_eq!(back.diff(k).unwrap(), c.diff(k).unwrap());
        }
        assert_eq!(z0(&c.shift(1)).unwrap().dims(), c.cocycles(1).unwrap().source.dims());
        let cid = cone(&ComplexMap::identity(&c));
        assert!(is_termwise_contractible(&cid, -3, 3).unwrap());
        let mixed = cid.direct_sum(&c);
        assert!(!is_termwise_contractible(&mixed, -3, 3).unwrap());
        let z = cone(&ComplexMap::zero(&c, &c));
        for k in -2..2 {
            assert_eq!(z.term(k).unwrap(), c.term(k).unwrap().sum2(&c.term(k + 1).unwrap()));
        }
    }

    #[test]
    fn zero_complex_has_zero_cocycles() {
        let alg = dual_numbers(2);
        let c = LazyComplex::zero(&shapes::arrow(), &alg);
        assert!(z0(&c).unwrap().is_zero());
    }

    #[test]
    fn sod_on_a_point_is_trivial() {
        let (_, x) = k_over_e();
        let c = complete_resolution(&x).unwrap();
        let s = sod_decompose(&c).unwrap();
        let r = s.verify(-2, 2).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(is_contractible_on(&s.xtc, -2, 2).unwrap());
        assert_eq!(s.xp.term(0).unwrap().dims(), vec![2]);
    }

    #[test]
    fn sod_over_the_arrow() {
        let alg = dual_numbers(2);
        let a = shapes::arrow();
        let k = Module::trivial(&alg, 1).unwrap();
        // (k ↪ Λ) is GProj
        let inc = crate::modules::injective_embed(&k).left;
        let x = Diagram::new(&a, &alg, vec![k.clone(), inc.target.clone()], vec![inc.matrix.clone()]).unwrap();
        let c = complete_resolution(&x).unwrap();
        let s = sod_decompose(&c).unwrap();
        let r = s.verify(-2, 2).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(is_contractible_on(&s.xtc, -2, 2).unwrap());
        // a termwise contractible input has stably trivial projective part
        let y = cone(&ComplexMap::identity(&c.restrict(&CatFunctor::object(&a, 0))));
        let ty = free_complex(&a, 0, &y).direct_sum(&y.extend_by_zero(&CatFunctor::object(&a, 1)));
        let s2 = sod_decompose(&ty).unwrap();
        assert!(s2.verify(-2, 2).unwrap().passed());
        assert!(crate::diagram::is_projective_diagram(&z0(&s2.xp).unwrap()));
    }

    #[test]
    fn complex_files_round_trip() {
        let (alg, x) = k_over_e();
        let c = complete_resolution(&x).unwrap();
        let f = c.to_file(-1, 1).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: ComplexFile = serde_json::from_str(&json).unwrap();
        let e = shapes::point();
        let c2 = back.load(&e, &alg).unwrap();
        assert_eq!(c2.diff(0).unwrap().comps, c.diff(0).unwrap().comps);
        assert!(c2.term(2).unwrap().is_zero());
        let mut periodic = ComplexFile { policy: PolicyFile::Periodic { period: 1 }, ..c.to_file(0, 0).unwrap() };
        periodic.diffs.insert("0".into(), [("*".to_string(), to_rows(&c.diff(0).unwrap().comps[0]))].into());
        let pc = periodic.load(&e, &alg).unwrap();
        assert!(pc.is_acyclic_on(-3, 3).unwrap());
    }
}
