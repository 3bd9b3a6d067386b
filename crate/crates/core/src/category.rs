//! Finite direct categories with full composition tables.
//!
//! Morphism indices `0..n_objects` are the identities, in object order.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Morphism {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectCategory {
    name: String,
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    comp: Vec<Option<usize>>,
    hom: Vec<Vec<usize>>,
    degree: Vec<usize>,
    irreducible: Vec<usize>,
}

pub type Cat = Arc<DirectCategory>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismFile {
    pub name: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CategoryFile {
    #[serde(default)]
    pub name: String,
    pub objects: Vec<String>,
    #[serde(default)]
    pub morphisms: Vec<MorphismFile>,
    #[serde(default)]
    pub comp: BTreeMap<String, String>,
}

impl DirectCategory {
    /// Build from objects, non-identity morphisms and the composites of
    /// composable non-identity pairs, `(g, f) ↦ g∘f`. Validates and grades.
    pub fn new(
        name: &str,
        objects: Vec<String>,
        arrows: Vec<(String, usize, usize)>,
        composites: &BTreeMap<(usize, usize), usize>,
    ) -> Result<DirectCategory> {
        let n = objects.len();
        let mut morphisms: Vec<Morphism> =
            objects.iter().enumerate().map(|(i, o)| Morphism { name: format!("id_{o}"), src: i, tgt: i }).collect();
        for (nm, s, t) in arrows {
            if s >= n || t >= n {
                return Err(Error::Category(format!("morphism {nm} has an unknown endpoint")));
            }
            if s == t {
                return Err(Error::Category(format!("non-identity endomorphism {nm}: not a direct category")));
            }
            morphisms.push(Morphism { name: nm, src: s, tgt: t });
        }
        let m = morphisms.len();
        let mut comp = vec![None; m * m];
        for g in 0..m {
            for f in 0..m {
                if morphisms[f].tgt != morphisms[g].src {
                    continue;
                }
                let h = if g < n {
                    f
                } else if f < n {
                    g
                } else {
                    // composites are given for non-identity pairs with index offset n
                    match composites.get(&(g - n, f - n)) {
                        Some(&h) => h + n,
                        None => {
                            return Err(Error::Category(format!(
                                "missing composite {}∘{}",
                                morphisms[g].name, morphisms[f].name
                            )))
                        }
                    }
                };
                if h >= m || morphisms[h].src != morphisms[f].src || morphisms[h].tgt != morphisms[g].tgt {
                    return Err(Error::Category(format!(
                        "composite {}∘{} has wrong endpoints",
                        morphisms[g].name, morphisms[f].name
                    )));
                }
                comp[g * m + f] = Some(h);
            }
        }
        let mut hom = vec![Vec::new(); n * n];
        for (i, mo) in morphisms.iter().enumerate() {
            hom[mo.src * n + mo.tgt].push(i);
        }
        let mut c =
            DirectCategory { name: name.to_string(), objects, morphisms, comp, hom, degree: vec![], irreducible: vec![] };
        c.check_associative()?;
        c.degree = c.grade()?;
        c.irreducible = c.find_irreducible();
        Ok(c)
    }

    pub fn from_file(f: &CategoryFile) -> Result<DirectCategory> {
        let idx = |o: &str| {
            f.objects.iter().position(|x| x == o).ok_or_else(|| Error::Category(format!("unknown object {o}")))
        };
        let mut arrows = Vec::new();
        for m in &f.morphisms {
            arrows.push((m.name.clone(), idx(&m.src)?, idx(&m.tgt)?));
        }
        let midx = |nm: &str| -> Result<usize> {
            f.morphisms.iter().position(|m| m.name == nm).ok_or_else(|| Error::Category(format!("unknown morphism {nm}")))
        };
        let mut composites = BTreeMap::new();
        for (k, v) in &f.comp {
            let (g, h) = k
                .split_once('∘')
                .ok_or_else(|| Error::Category(format!("composition key {k} must have the form g∘f")))?;
            composites.insert((midx(g.trim())?, midx(h.trim())?), midx(v.trim())?);
        }
        DirectCategory::new(&f.name, f.objects.clone(), arrows, &composites)
    }

    pub fn to_file(&self) -> CategoryFile {
        let n = self.objects.len();
        let morphisms = self.morphisms[n..]
            .iter()
            .map(|m| MorphismFile { name: m.name.clone(), src: self.objects[m.src].clone(), tgt: self.objects[m.tgt].clone() })
            .collect();
        let mut comp = BTreeMap::new();
        for g in n..self.n_morphisms() {
            for f in n..self.n_morphisms() {
                if let Some(h) = self.compose(g, f) {
                    comp.insert(format!("{}∘{}", self.morphisms[g].name, self.morphisms[f].name), self.morphisms[h].name.clone());
                }
            }
        }
        CategoryFile { name: self.name.clone(), objects: self.objects.clone(), morphisms, comp }
    }

    fn check_associative(&self) -> Result<()> {
        let m = self.n_morphisms();
        for f in 0..m {
            for g in 0..m {
                let Some(gf) = self.compose(g, f) else { continue };
                for h in 0..m {
                    let Some(hg) = self.compose(h, g) else { continue };
                    if self.compose(h, gf) != self.compose(hg, f) {
                        return Err(Error::Category(format!(
                            "composition not associative on ({}, {}, {})",
                            self.morphisms[h].name, self.morphisms[g].name, self.morphisms[f].name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Longest-path layering; errors on cycles.
    fn grade(&self) -> Result<Vec<usize>> {
        let n = self.objects.len();
        let mut indeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for (a, b) in self.arrow_pairs() {
            indeg[b] += 1;
            succ[a].push(b);
        }
        let mut degree = vec![0usize; n];
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(a) = queue.pop() {
            seen += 1;
            for &b in &succ[a] {
                degree[b] = degree[b].max(degree[a] + 1);
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    queue.push(b);
                }
            }
        }
        if seen < n {
            return Err(Error::Category("morphisms form a cycle: not a direct category".into()));
        }
        Ok(degree)
    }

    fn find_irreducible(&self) -> Vec<usize> {
        let n = self.n_objects();
        let mut composite = vec![false; self.n_morphisms()];
        for g in n..self.n_morphisms() {
            for f in n..self.n_morphisms() {
                if let Some(h) = self.compose(g, f) {
                    composite[h] = true;
                }
            }
        }
        (n..self.n_morphisms()).filter(|&f| !composite[f]).collect()
    }

    fn arrow_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.objects.len();
        let mut v: Vec<(usize, usize)> = self.morphisms[n..].iter().map(|m| (m.src, m.tgt)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn with_name(mut self, name: &str) -> DirectCategory {
        self.name = name.to_string();
        self
    }
    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }
    pub fn n_morphisms(&self) -> usize {
        self.morphisms.len()
    }
    pub fn objects(&self) -> &[String] {
        &self.objects
    }
    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }
    pub fn morphism(&self, f: usize) -> &Morphism {
        &self.morphisms[f]
    }
    pub fn identity(&self, i: usize) -> usize {
        i
    }
    pub fn is_identity(&self, f: usize) -> bool {
        f < self.objects.len()
    }
    pub fn src(&self, f: usize) -> usize {
        self.morphisms[f].src
    }
    pub fn tgt(&self, f: usize) -> usize {
        self.morphisms[f].tgt
    }
    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }
    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }
    pub fn max_degree(&self) -> usize {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    /// `g∘f` when composable.
    #[inline]
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.comp[g * self.morphisms.len() + f]
    }

    pub fn comp(&self, g: usize, f: usize) -> usize {
        self.compose(g, f).unwrap_or_else(|| {
            panic!("morphisms {} and {} are not composable", self.morphisms[g].name, self.morphisms[f].name)
        })
    }

    /// Morphisms a → b, identity first when a = b.
    pub fn hom(&self, a: usize, b: usize) -> &[usize] {
        &self.hom[a * self.objects.len() + b]
    }

    /// Non-identity morphisms that are not composites of two non-identities;
    /// they generate the category.
    pub fn irreducible(&self) -> &[usize] {
        &self.irreducible
    }

    pub fn non_identity(&self) -> impl Iterator<Item = usize> + '_ {
        self.objects.len()..self.morphisms.len()
    }

    pub fn object_index(&self, name: &str) -> Result<usize> {
        self.objects.iter().position(|o| o == name).ok_or_else(|| Error::Category(format!("unknown object {name}")))
    }

    pub fn morphism_index(&self, name: &str) -> Result<usize> {
        self.morphisms.iter().position(|m| m.name == name).ok_or_else(|| Error::Category(format!("unknown morphism {name}")))
    }

    /// Objects sorted by (degree, index): a linear extension of the order.
    pub fn objects_by_degree(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.n_objects()).collect();
        v.sort_by_key(|&i| (self.degree[i], i));
        v
    }

    /// Length of the longest chain of non-identity morphisms.
    pub fn longest_chain(&self) -> usize {
        self.max_degree()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

/// Standard shapes.
pub mod shapes {
    use super::*;

    fn build(name: &str, objects: &[&str], arrows: &[(&str, usize, usize)], comp: &[(usize, usize, usize)]) -> Cat {
        let composites = comp.iter().map(|&(g, f, h)| ((g, f), h)).collect();
        Arc::new(
            DirectCategory::new(
                name,
                objects.iter().map(|s| s.to_string()).collect(),
                arrows.iter().map(|&(n, s, t)| (n.to_string(), s, t)).collect(),
                &composites,
            )
            .expect("standard shape is valid"),
        )
    }

    /// The terminal category e.
    pub fn point() -> Cat {
        build("e", &["*"], &[], &[])
    }

    /// [1] = (0 → 1).
    pub fn arrow() -> Cat {
        build("[1]", &["0", "1"], &[("e0", 0, 1)], &[])
    }

    /// [n] = (0 → 1 → ⋯ → n), with morphisms named `i->j`.
    pub fn chain(n: usize) -> Cat {
        if n == 1 {
            return arrow();
        }
        let objs: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
        let mut arrows = Vec::new();
        let mut index = BTreeMap::new();
        for i in 0..=n {
            for j in i + 1..=n {
                index.insert((i, j), arrows.len());
                arrows.push((format!("{i}->{j}"), i, j));
            }
        }
        let mut composites = BTreeMap::new();
        for (&(i, j), &f) in &index {
            for (&(j2, k), &g) in &index {
                if j2 == j {
                    composites.insert((g, f), index[&(i, k)]);
                }
            }
        }
        Arc::new(DirectCategory::new(&format!("[{n}]"), objs, arrows, &composites).expect("chain is valid"))
    }

    /// [1]×[1] with objects (0,0), (0,1), (1,0), (1,1).
    pub fn square() -> Cat {
        Arc::new(product(&arrow(), &arrow()).with_name("square"))
    }

    /// The span b ← a → c (pushout shape), realized as the square minus (1,1).
    pub fn span() -> Cat {
        let sq = square();
        let (c, _) = full_subcategory(&sq, &[0, 1, 2]);
        Arc::new((*c).clone().with_name("span"))
    }

    /// The cospan (0,1) → (1,1) ← (1,0), the square minus (0,0).
    pub fn cospan() -> Cat {
        let sq = square();
        let (c, _) = full_subcategory(&sq, &[1, 2, 3]);
        Arc::new((*c).clone().with_name("cospan"))
    }

    /// Poset on `n` objects from a strict relation, closed transitively.
    pub fn poset(name: &str, n: usize, less: &[(usize, usize)]) -> Result<Cat> {
        let mut rel = vec![vec![false; n]; n];
        for &(a, b) in less {
            rel[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if rel[i][k] && rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
        if (0..n).any(|i| rel[i][i]) {
            return Err(Error::Category("relation has a cycle".into()));
        }
        let mut arrows = Vec::new();
        let mut index = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if rel[i][j] {
                    index.insert((i, j), arrows.len());
                    arrows.push((format!("{i}<{j}"), i, j));
                }
            }
        }
        let mut composites = BTreeMap::new();
        for (&(i, j), &f) in &index {
            for (&(j2, k), &g) in &index {
                if j2 == j {
                    composites.insert((g, f), index[&(i, k)]);
                }
            }
        }
        let objs = (0..n).map(|i| i.to_string()).collect();
        Ok(Arc::new(DirectCategory::new(name, objs, arrows, &composites)?))
    }

    /// Free category on a DAG: morphisms are directed paths.
    pub fn free_on_dag(name: &str, n: usize, edges: &[(usize, usize)]) -> Result<Cat> {
        // enumerate paths as edge sequences
        let mut paths: Vec<Vec<usize>> = Vec::new();
        let mut frontier: Vec<Vec<usize>> = (0..edges.len()).map(|e| vec![e]).collect();
        while !frontier.is_empty() {
            if paths.len() > 4096 {
                return Err(Error::Category("too many paths".into()));
            }
            let mut next = Vec::new();
            for p in &frontier {
                let end = edges[*p.last().unwrap()].1;
                for (e, &(s, _)) in edges.iter().enumerate() {
                    if s == end {
                        let mut q = p.clone();
                        q.push(e);
                        next.push(q);
                    }
                }
            }
            paths.extend(frontier);
            frontier = next;
        }
        let index: BTreeMap<Vec<usize>, usize> = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let arrows = paths
            .iter()
            .map(|p| {
                let nm = p.iter().map(|e| format!("a{e}")).collect::<Vec<_>>().join(".");
                (nm, edges[p[0]].0, edges[*p.last().unwrap()].1)
            })
            .collect();
        let mut composites = BTreeMap::new();
        for (f, pf) in paths.iter().enumerate() {
            for (g, pg) in paths.iter().enumerate() {
                if edges[*pf.last().unwrap()].1 == edges[pg[0]].0 {
                    let mut q = pf.clone();
                    q.extend(pg);
                    composites.insert((g, f), index[&q]);
                }
            }
        }
        let objs = (0..n).map(|i| i.to_string()).collect();
        Ok(Arc::new(DirectCategory::new(name, objs, arrows, &composites)?))
    }

    /// Product category; objects are named `(i,j)`.
    pub fn product(a: &Cat, b: &Cat) -> DirectCategory {
        let (na, nb) = (a.n_objects(), b.n_objects());
        let objects: Vec<String> =
            (0..na).flat_map(|i| (0..nb).map(move |j| (i, j))).map(|(i, j)| format!("({},{})", a.objects[i], b.objects[j])).collect();
        let obj = |i: usize, j: usize| i * nb + j;
        // non-identity pairs
        let mut pairs = Vec::new();
        for f in 0..a.n_morphisms() {
            for g in 0..b.n_morphisms() {
                if !(a.is_identity(f) && b.is_identity(g)) {
                    pairs.push((f, g));
                }
            }
        }
        let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let arrows = pairs
            .iter()
            .map(|&(f, g)| {
                let (mf, mg) = (a.morphism(f), b.morphism(g));
                (format!("({},{})", mf.name, mg.name), obj(mf.src, mg.src), obj(mf.tgt, mg.tgt))
            })
            .collect();
        let mut composites = BTreeMap::new();
        for (x, &(f1, g1)) in pairs.iter().enumerate() {
            for (y, &(f2, g2)) in pairs.iter().enumerate() {
                if let (Some(f), Some(g)) = (a.compose(f2, f1), b.compose(g2, g1)) {
                    if let Some(&z) = index.get(&(f, g)) {
                        composites.insert((y, x), z);
                    }
                }
            }
        }
        DirectCategory::new(&format!("{}x{}", a.name, b.name), objects, arrows, &composites).expect("product is valid")
    }

    /// Index in `product(a, b)` of the morphism (f, g).
    pub fn product_index(a: &Cat, b: &Cat, f: usize, g: usize) -> usize {
        let (na, nb, mb) = (a.n_objects(), b.n_objects(), b.n_morphisms());
        if a.is_identity(f) && b.is_identity(g) {
            return f * nb + g;
        }
        let before = if f < na { f * nb + g.min(nb) } else { na * nb };
        na * nb + f * mb + g - before
    }

    /// Opposite category; morphism indices and names are preserved.
    pub fn opposite(c: &DirectCategory) -> DirectCategory {
        let m = c.n_morphisms();
        let morphisms = c.morphisms.iter().map(|mo| Morphism { name: mo.name.clone(), src: mo.tgt, tgt: mo.src }).collect::<Vec<_>>();
        let mut comp = vec![None; m * m];
        for g in 0..m {
            for f in 0..m {
                comp[g * m + f] = c.compose(f, g);
            }
        }
        let n = c.n_objects();
        let mut hom = vec![Vec::new(); n * n];
        for (i, mo) in morphisms.iter().enumerate() {
            hom[mo.src * n + mo.tgt].push(i);
        }
        let mut op = DirectCategory {
            name: match c.name.strip_suffix("^op") {
                Some(base) => base.to_string(),
                None => format!("{}^op", c.name),
            },
            objects: c.objects.clone(),
            morphisms,
            comp,
            hom,
            degree: vec![],
            irreducible: c.irreducible.clone(),
        };
        op.degree = op.grade().expect("opposite of a direct category is direct");
        op
    }

    pub fn disjoint_union(a: &Cat, b: &Cat) -> (Cat, CatFunctor, CatFunctor) {
        let (na, nb) = (a.n_objects(), b.n_objects());
        let mut objects: Vec<String> = a.objects.iter().map(|o| format!("{o}.0")).collect();
        objects.extend(b.objects.iter().map(|o| format!("{o}.1")));
        let mut arrows = Vec::new();
        let (ma, mb) = (a.n_morphisms() - na, b.n_morphisms() - nb);
        for f in a.non_identity() {
            let mo = a.morphism(f);
            arrows.push((format!("{}.0", mo.name), mo.src, mo.tgt));
        }
        for f in b.non_identity() {
            let mo = b.morphism(f);
            arrows.push((format!("{}.1", mo.name), na + mo.src, na + mo.tgt));
        }
        let mut composites = BTreeMap::new();
        for g in a.non_identity() {
            for f in a.non_identity() {
                if let Some(h) = a.compose(g, f) {
                    composites.insert((g - na, f - na), h - na);
                }
            }
        }
        for g in b.non_identity() {
            for f in b.non_identity() {
                if let Some(h) = b.compose(g, f) {
                    composites.insert((ma + g - nb, ma + f - nb), ma + h - nb);
                }
            }
        }
        let _ = mb;
        let c: Cat = Arc::new(
            DirectCategory::new(&format!("{}+{}", a.name, b.name), objects, arrows, &composites).expect("union is valid"),
        );
        let nc = na + nb;
        let ia = CatFunctor {
            source: a.clone(),
            target: c.clone(),
            obj: (0..na).collect(),
            mor: (0..a.n_morphisms()).map(|f| if a.is_identity(f) { f } else { nc + f - na }).collect(),
        };
        let ib = CatFunctor {
            source: b.clone(),
            target: c.clone(),
            obj: (na..nc).collect(),
            mor: (0..b.n_morphisms()).map(|f| if b.is_identity(f) { na + f } else { nc + ma + f - nb }).collect(),
        };
        (c, ia, ib)
    }

    /// Full subcategory on the listed objects, with its inclusion.
    pub fn full_subcategory(c: &Cat, objs: &[usize]) -> (Cat, CatFunctor) {
        let n = objs.len();
        let pos = |o: usize| objs.iter().position(|&x| x == o);
        let mut kept = Vec::new();
        for f in c.non_identity() {
            let mo = c.morphism(f);
            if pos(mo.src).is_some() && pos(mo.tgt).is_some() {
                kept.push(f);
            }
        }
        let arrows = kept.iter().map(|&f| {
            let mo = c.morphism(f);
            (mo.name.clone(), pos(mo.src).unwrap(), pos(mo.tgt).unwrap())
        });
        let arrows: Vec<_> = arrows.collect();
        let kpos = |f: usize| kept.iter().position(|&x| x == f);
        let mut composites = BTreeMap::new();
        for (x, &f) in kept.iter().enumerate() {
            for (y, &g) in kept.iter().enumerate() {
                if let Some(h) = c.compose(g, f) {
                    composites.insert((y, x), kpos(h).expect("full subcategory closed under composition"));
                }
            }
        }
        let objects = objs.iter().map(|&o| c.objects[o].clone()).collect();
        let sub: Cat = Arc::new(DirectCategory::new(&format!("{}|sub", c.name), objects, arrows, &composites).expect("valid"));
        let mut mor: Vec<usize> = objs.to_vec();
        mor.extend(kept.iter().copied());
        let inc = CatFunctor { source: sub.clone(), target: c.clone(), obj: objs.to_vec(), mor };
        debug_assert_eq!(inc.mor.len(), inc.source.n_morphisms());
        let _ = n;
        (sub, inc)
    }
}

/// A functor between finite direct categories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatFunctor {
    pub source: Cat,
    pub target: Cat,
    pub obj: Vec<usize>,
    pub mor: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctorFile {
    pub source: String,
    pub target: String,
    pub objects: BTreeMap<String, String>,
    #[serde(default)]
    pub morphisms: BTreeMap<String, String>,
}

impl CatFunctor {
    pub fn new(source: &Cat, target: &Cat, obj: Vec<usize>, mor: Vec<usize>) -> Result<CatFunctor> {
        let u = CatFunctor { source: source.clone(), target: target.clone(), obj, mor };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        let (s, t) = (&self.source, &self.target);
        if self.obj.len() != s.n_objects() || self.mor.len() != s.n_morphisms() {
            return Err(Error::Functor("object or morphism map has the wrong size".into()));
        }
        if self.obj.iter().any(|&o| o >= t.n_objects()) || self.mor.iter().any(|&m| m >= t.n_morphisms()) {
            return Err(Error::Functor("map refers to unknown target data".into()));
        }
        for i in 0..s.n_objects() {
            if self.mor[i] != self.obj[i] {
                return Err(Error::Functor(format!("identity of {} not preserved", s.objects()[i])));
            }
        }
        for f in 0..s.n_morphisms() {
            let (mf, uf) = (s.morphism(f), t.morphism(self.mor[f]));
            if uf.src != self.obj[mf.src] || uf.tgt != self.obj[mf.tgt] {
                return Err(Error::Functor(format!("morphism {} not mapped compatibly with endpoints", mf.name)));
            }
        }
        for g in 0..s.n_morphisms() {
            for f in 0..s.n_morphisms() {
                if let Some(h) = s.compose(g, f) {
                    if t.compose(self.mor[g], self.mor[f]) != Some(self.mor[h]) {
                        return Err(Error::Functor(format!(
                            "composition {}∘{} not preserved",
                            s.morphism(g).name,
                            s.morphism(f).name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_file(f: &FunctorFile, source: &Cat, target: &Cat) -> Result<CatFunctor> {
        let mut obj = vec![usize::MAX; source.n_objects()];
        for (a, b) in &f.objects {
            obj[source.object_index(a)?] = target.object_index(b)?;
        }
        if obj.contains(&usize::MAX) {
            return Err(Error::Functor("object map is not total".into()));
        }
        let mut mor: Vec<usize> = obj.clone();
        mor.resize(source.n_morphisms(), usize::MAX);
        for (a, b) in &f.morphisms {
            let fa = source.morphism_index(a)?;
            let fb = match target.morphism_index(b) {
                Ok(x) => x,
                Err(_) if b == "id" => target.identity(obj[source.src(fa)]),
                Err(e) => return Err(e),
            };
            mor[fa] = fb;
        }
        // unlisted morphisms between objects with a unique target hom are inferred
        for fa in source.non_identity() {
            if mor[fa] == usize::MAX {
                let h = target.hom(obj[source.src(fa)], obj[source.tgt(fa)]);
                if h.len() == 1 {
                    mor[fa] = h[0];
                } else {
                    return Err(Error::Functor(format!("morphism {} is not mapped", source.morphism(fa).name)));
                }
            }
        }
        CatFunctor::new(source, target, obj, mor)
    }

    pub fn to_file(&self) -> FunctorFile {
        let (s, t) = (&self.source, &self.target);
        FunctorFile {
            source: s.name().to_string(),
            target: t.name().to_string(),
            objects: (0..s.n_objects()).map(|i| (s.objects()[i].clone(), t.objects()[self.obj[i]].clone())).collect(),
            morphisms: s.non_identity().map(|f| (s.morphism(f).name.clone(), t.morphism(self.mor[f]).name.clone())).collect(),
        }
    }

    pub fn identity(c: &Cat) -> CatFunctor {
        CatFunctor { source: c.clone(), target: c.clone(), obj: (0..c.n_objects()).collect(), mor: (0..c.n_morphisms()).collect() }
    }

    /// The unique functor to the point.
    pub fn to_point(c: &Cat) -> CatFunctor {
        let e = shapes::point();
        CatFunctor { source: c.clone(), target: e, obj: vec![0; c.n_objects()], mor: vec![0; c.n_morphisms()] }
    }

    /// The functor e → c selecting object i.
    pub fn object(c: &Cat, i: usize) -> CatFunctor {
        CatFunctor { source: shapes::point(), target: c.clone(), obj: vec![i], mor: vec![i] }
    }

    /// `self ∘ other`.
    pub fn after(&self, other: &CatFunctor) -> CatFunctor {
        CatFunctor {
            source: other.source.clone(),
            target: self.target.clone(),
            obj: other.obj.iter().map(|&o| self.obj[o]).collect(),
            mor: other.mor.iter().map(|&m| self.mor[m]).collect(),
        }
    }

    /// The opposite functor between opposite categories.
    pub fn opposite(&self) -> CatFunctor {
        CatFunctor {
            source: Arc::new(shapes::opposite(&self.source)),
            target: Arc::new(shapes::opposite(&self.target)),
            obj: self.obj.clone(),
            mor: self.mor.clone(),
        }
    }

    /// Same functor with source/target replaced by given (structurally equal) categories.
    pub fn retarget(&self, source: &Cat, target: &Cat) -> CatFunctor {
        CatFunctor { source: source.clone(), target: target.clone(), obj: self.obj.clone(), mor: self.mor.clone() }
    }

    pub fn is_injective_on_objects(&self) -> bool {
        let mut v = self.obj.clone();
        v.sort();
        v.dedup();
        v.len() == self.obj.len()
    }

    pub fn is_fully_faithful(&self) -> bool {
        let (s, t) = (&self.source, &self.target);
        for a in 0..s.n_objects() {
            for b in 0..s.n_objects() {
                let mut img: Vec<usize> = s.hom(a, b).iter().map(|&f| self.mor[f]).collect();
                img.sort();
                let mut th = t.hom(self.obj[a], self.obj[b]).to_vec();
                th.sort();
                if img != th {
                    return false;
                }
            }
        }
        true
    }

    fn check_embedding(&self) -> Result<()> {
        if !self.is_fully_faithful() || !self.is_injective_on_objects() {
            return Err(Error::Functor("sieve/cosieve test needs a fully faithful, object-injective functor".into()));
        }
        Ok(())
    }

    /// Every morphism j → u(i) has j in the image.
    pub fn is_sieve(&self) -> Result<bool> {
        self.check_embedding()?;
        let t = &self.target;
        Ok(t.morphisms().iter().all(|m| !self.obj.contains(&m.tgt) || self.obj.contains(&m.src)))
    }

    /// Every morphism u(i) → j has j in the image.
    pub fn is_cosieve(&self) -> Result<bool> {
        self.check_embedding()?;
        let t = &self.target;
        Ok(t.morphisms().iter().all(|m| !self.obj.contains(&m.src) || self.obj.contains(&m.tgt)))
    }

    /// Preimage object of a target object under an injective functor.
    pub fn preimage(&self, j: usize) -> Option<usize> {
        self.obj.iter().position(|&o| o == j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SliceSide {
    /// u/j: pairs (i, f: u(i) → j).
    Under,
    /// j/u: pairs (i, f: j → u(i)).
    Over,
}

/// A slice category with its projection to the source of u.
#[derive(Clone, Debug)]
pub struct Slice {
    pub cat: Cat,
    pub projection: CatFunctor,
    /// Slice object k is the pair (pairs[k].0, pairs[k].1) = (i, f).
    pub pairs: Vec<(usize, usize)>,
    pub anchor: usize,
    pub side: SliceSide,
}

pub fn slice(u: &CatFunctor, j: usize, side: SliceSide, punctured: bool) -> Slice {
    let (s, t) = (&u.source, &u.target);
    let mut pairs = Vec::new();
    for i in 0..s.n_objects() {
        let homs = match side {
            SliceSide::Under => t.hom(u.obj[i], j),
            SliceSide::Over => t.hom(j, u.obj[i]),
        };
        for &f in homs {
            if punctured && t.is_identity(f) {
                continue;
            }
            pairs.push((i, f));
        }
    }
    let objects: Vec<String> = pairs
        .iter()
        .map(|&(i, f)| format!("({},{})", s.objects()[i], t.morphism(f).name))
        .collect();
    // non-identity slice morphisms: g: i → i' non-identity with compatibility
    let mut arrows = Vec::new();
    let mut under = Vec::new();
    for (a, &(i, f)) in pairs.iter().enumerate() {
        for (b, &(i2, f2)) in pairs.iter().enumerate() {
            for &g in s.hom(i, i2) {
                if s.is_identity(g) {
                    continue;
                }
                let ok = match side {
                    SliceSide::Under => t.compose(f2, u.mor[g]) == Some(f),
                    SliceSide::Over => t.compose(u.mor[g], f) == Some(f2),
                };
                if ok {
                    arrows.push((format!("{}:{}->{}", s.morphism(g).name, a, b), a, b));
                    under.push(g);
                }
            }
        }
    }
    let idx: BTreeMap<(usize, usize, usize), usize> =
        arrows.iter().zip(&under).enumerate().map(|(k, (&(_, a, b), &g))| ((a, b, g), k)).collect();
    let mut composites = BTreeMap::new();
    for (x, (&(_, a, b), &g)) in arrows.iter().zip(&under).enumerate() {
        for (y, (&(_, b2, c), &h)) in arrows.iter().zip(&under).enumerate() {
            if b2 == b {
                let hg = s.comp(h, g);
                composites.insert((y, x), idx[&(a, c, hg)]);
            }
        }
    }
    let cat: Cat = Arc::new(
        DirectCategory::new(&format!("slice({})", t.objects()[j]), objects, arrows, &composites).expect("slice is a direct category"),
    );
    let n = pairs.len();
    let mut mor: Vec<usize> = pairs.iter().map(|&(i, _)| i).collect();
    mor.extend(under.iter().copied());
    let projection = CatFunctor { source: cat.clone(), target: s.clone(), obj: pairs.iter().map(|&(i, _)| i).collect(), mor };
    debug_assert_eq!(projection.mor.len(), cat.n_morphisms());
    let _ = n;
    Slice { cat, projection, pairs, anchor: j, side }
}

/// ∂(I/j): the under-slice of the identity at j without (j, id).
pub fn punctured_under(c: &Cat, j: usize) -> Slice {
    slice(&CatFunctor::identity(c), j, SliceSide::Under, true)
}

/// ∂(j/I): the over-slice of the identity at j without (j, id).
pub fn punctured_over(c: &Cat, j: usize) -> Slice {
    slice(&CatFunctor::identity(c), j, SliceSide::Over, true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub objects: Vec<usize>,
    pub terminal: Option<usize>,
    pub initial: Option<usize>,
}

pub fn analyze_components(c: &DirectCategory) -> Vec<Component> {
    let n = c.n_objects();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for m in c.morphisms() {
        let (a, b) = (find(&mut parent, m.src), find(&mut parent, m.tgt));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups
        .into_values()
        .map(|objs| {
            let terminal = objs.iter().copied().find(|&t| objs.iter().all(|&a| c.hom(a, t).len() == 1));
            let initial = objs.iter().copied().find(|&t| objs.iter().all(|&a| c.hom(t, a).len() == 1));
            Component { objects: objs, terminal, initial }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::shapes::*;
    use super::*;

    #[test]
    fn degrees() {
        assert_eq!(arrow().degrees(), &[0, 1]);
        let sq = square();
        assert_eq!(sq.degrees(), &[0, 1, 1, 2]);
        assert_eq!(sq.n_morphisms(), 9);
        assert_eq!(span().degrees(), &[0, 1, 1]);
        assert_eq!(cospan().degrees(), &[0, 0, 1]);
    }

    #[test]
    fn endomorphism_rejected() {
        let r = DirectCategory::new("bad", vec!["a".into()], vec![("f".into(), 0, 0)], &BTreeMap::new());
        assert!(r.is_err());
    }

    #[test]
    fn punctured_slices() {
        let a = arrow();
        let s1 = punctured_under(&a, 1);
        assert_eq!(s1.cat.n_objects(), 1);
        assert_eq!(s1.cat.n_morphisms(), 1);
        assert_eq!(punctured_under(&a, 0).cat.n_objects(), 0);
        let sq = square();
        let s = punctured_under(&sq, 3);
        assert_eq!(s.cat.n_objects(), 3);
        assert_eq!(s.cat.n_morphisms(), 5);
    }

    #[test]
    fn components_of_slices() {
        let a = arrow();
        let u = CatFunctor::object(&a, 0);
        let s = slice(&u, 1, SliceSide::Under, false);
        let comps = analyze_components(&s.cat);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].terminal, Some(0));
        let u1 = CatFunctor::object(&a, 1);
        let s = slice(&u1, 1, SliceSide::Over, false);
        assert_eq!(analyze_components(&s.cat)[0].initial, Some(0));
        let s = slice(&u1, 0, SliceSide::Under, false);
        assert!(analyze_components(&s.cat).is_empty());
    }

    #[test]
    fn sieves() {
        let a = arrow();
        let (sub0, inc0) = full_subcategory(&a, &[0]);
        let _ = sub0;
        assert!(inc0.is_sieve().unwrap());
        assert!(!inc0.is_cosieve().unwrap());
        let (_, inc1) = full_subcategory(&a, &[1]);
        assert!(inc1.is_cosieve().unwrap());
        assert!(!inc1.is_sieve().unwrap());
        let (_, inc00) = full_subcategory(&square(), &[0]);
        assert!(inc00.is_sieve().unwrap());
        assert!(CatFunctor::to_point(&a).is_sieve().is_err());
    }

    #[test]
    fn opposite_involution_and_product_unit() {
        let sq = square();
        let op = opposite(&opposite(&sq));
        assert_eq!(op.morphisms(), sq.morphisms());
        assert_eq!(opposite(&sq).degrees(), &[2, 1, 1, 0]);
        let p = product(&arrow(), &point());
        assert_eq!(p.n_objects(), 2);
        assert_eq!(p.n_morphisms(), 3);
    }

    #[test]
    fn product_index_matches_names() {
        let (a, b) = (arrow(), chain(3));
        let p = product(&a, &b);
        for f in 0..a.n_morphisms() {
            for g in 0..b.n_morphisms() {
                let k = product_index(&a, &b, f, g);
                assert_eq!(p.src(k), a.src(f) * b.n_objects() + b.src(g));
                assert_eq!(p.tgt(k), a.tgt(f) * b.n_objects() + b.tgt(g));
                if !(a.is_identity(f) && b.is_identity(g)) {
                    assert_eq!(p.morphism(k).name, format!("({},{})", a.morphism(f).name, b.morphism(g).name));
                }
            }
        }
    }

    #[test]
    fn file_roundtrip() {
        let sq = square();
        let f = sq.to_file();
        let back = DirectCategory::from_file(&f).unwrap();
        assert_eq!(back.n_morphisms(), 9);
        assert_eq!(back.degrees(), sq.degrees());
    }

    #[test]
    fn free_dag_paths() {
        let c = free_on_dag("d", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        // paths: a0, a1, a2, a0.a1
        assert_eq!(c.n_morphisms(), 3 + 4);
        assert_eq!(c.hom(0, 2).len(), 2);
    }
}
