//! Scenario files: named inputs plus the suites to run over them.
//!
//! Every input slot accepts either an inline JSON value or a path, resolved
//! relative to the scenario file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use derlab_core::algebra::{Algebra, AlgebraFile};
use derlab_core::category::{Cat, CategoryFile, CatFunctor, DirectCategory, FunctorFile};
use derlab_core::complex::{ComplexFile, LazyComplex};
use derlab_core::diagram::{Diagram, DiagramFile};
use derlab_core::dgkan::KanDirection;
use derlab_core::modules::{is_self_injective, SearchBudget};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::InputError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(String),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> Source<T> {
    fn resolve(&self, base: &Path) -> Result<T, InputError> {
        match self {
            Source::Inline(t) => Ok(t.clone()),
            Source::Path(p) => read_json(&base.join(p)),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn default_budget() -> usize {
    SearchBudget::default().budget
}
fn default_margin() -> i64 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub algebra: Source<AlgebraFile>,
    #[serde(default)]
    pub categories: BTreeMap<String, Source<CategoryFile>>,
    #[serde(default)]
    pub functors: BTreeMap<String, Source<FunctorFile>>,
    #[serde(default)]
    pub diagrams: BTreeMap<String, Source<DiagramFile>>,
    #[serde(default)]
    pub complexes: BTreeMap<String, Source<ComplexFile>>,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
    /// Checks on complexes use the window [-1 - margin, 1 + margin].
    #[serde(default = "default_margin")]
    pub window_margin: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Suite {
    Validate,
    GorensteinReport {
        #[serde(default)]
        items: Vec<ClassItem>,
    },
    Kan {
        items: Vec<KanItem>,
    },
    Approx {
        diagrams: Vec<String>,
    },
    StableEquiv {
        #[serde(default)]
        roundtrip: Vec<String>,
        #[serde(default)]
        pairs: Vec<PairItem>,
    },
    Sod {
        #[serde(default)]
        complexes: Vec<String>,
        /// Diagrams whose complete resolutions are decomposed.
        #[serde(default)]
        resolutions: Vec<String>,
    },
    Crosscheck {
        items: Vec<KanItem>,
    },
    DerivatorAxioms {
        #[serde(default)]
        der1: Vec<PairItem>,
        #[serde(default)]
        der2: Vec<String>,
        #[serde(default)]
        der3: Vec<KanItem>,
        #[serde(default)]
        der4: Vec<Der4Item>,
        #[serde(default)]
        der5: Vec<String>,
    },
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Validate => "validate",
            Suite::GorensteinReport { .. } => "gorenstein-report",
            Suite::Kan { .. } => "kan",
            Suite::Approx { .. } => "approx",
            Suite::StableEquiv { .. } => "stable-equiv",
            Suite::Sod { .. } => "sod",
            Suite::Crosscheck { .. } => "crosscheck",
            Suite::DerivatorAxioms { .. } => "derivator-axioms",
        }
    }
}

/// Classification of one diagram, with optional expected values.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassItem {
    pub diagram: String,
    pub gproj: Option<bool>,
    pub ginj: Option<bool>,
    pub wtriv: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KanItem {
    pub functor: String,
    pub diagram: String,
    pub direction: KanDirection,
    /// Diagrams over the target used to compare hom dimensions.
    #[serde(default)]
    pub against: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairItem {
    pub left: String,
    pub right: String,
    pub expect: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Der4Item {
    pub functor: String,
    pub object: String,
    /// A diagram (completely resolved) or a complex.
    pub input: String,
}

/// A scenario with every name resolved and every input validated.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub path: PathBuf,
    pub alg: Arc<Algebra>,
    pub categories: BTreeMap<String, Cat>,
    pub functors: BTreeMap<String, CatFunctor>,
    pub diagrams: BTreeMap<String, Diagram>,
    pub complexes: BTreeMap<String, LazyComplex>,
    pub suites: Vec<Suite>,
    pub budget: SearchBudget,
    pub window: (i64, i64),
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, InputError> {
        let raw: ScenarioFile = read_json(path)?;
        Scenario::from_raw(raw, path)
    }

    pub fn from_raw(raw: ScenarioFile, path: &Path) -> Result<Scenario, InputError> {
        let base = path.parent().unwrap_or(Path::new("."));
        let alg = Algebra::from_file(&raw.algebra.resolve(base)?).map_err(|e| InputError(format!("algebra: {e}")))?;
        if !is_self_injective(&alg) {
            return Err(InputError("self-injectivity gate: the algebra is not self-injective".into()));
        }
        let mut categories = BTreeMap::new();
        for (name, src) in &raw.categories {
            let c = DirectCategory::from_file(&src.resolve(base)?).map_err(|e| InputError(format!("category {name}: {e}")))?;
            categories.insert(name.clone(), Arc::new(c));
        }
        let cat = |name: &str, whose: &str| {
            categories.get(name).cloned().ok_or_else(|| InputError(format!("{whose}: unknown category {name}")))
        };
        let mut functors = BTreeMap::new();
        for (name, src) in &raw.functors {
            let f = src.resolve(base)?;
            let (s, t) = (cat(&f.source, name)?, cat(&f.target, name)?);
            let u = CatFunctor::from_file(&f, &s, &t).map_err(|e| InputError(format!("functor {name}: {e}")))?;
            functors.insert(name.clone(), u);
        }
        let mut diagrams = BTreeMap::new();
        for (name, src) in &raw.diagrams {
            let f = src.resolve(base)?;
            let shape = cat(&f.shape, name)?;
            let d = Diagram::from_file(&f, &shape, &alg).map_err(|e| InputError(format!("diagram {name}: {e}")))?;
            diagrams.insert(name.clone(), d);
        }
        let window = (-1 - raw.window_margin, 1 + raw.window_margin);
        let mut complexes = BTreeMap::new();
        for (name, src) in &raw.complexes {
            let f = src.resolve(base)?;
            let shape = cat(&f.shape, name)?;
            let c = f.load(&shape, &alg).map_err(|e| InputError(format!("complex {name}: {e}")))?;
            c.check_window(window.0, window.1).map_err(|e| InputError(format!("complex {name}: {e}")))?;
            complexes.insert(name.clone(), c);
        }
        let s = Scenario {
            path: path.to_path_buf(),
            alg,
            categories,
            functors,
            diagrams,
            complexes,
            suites: raw.suites,
            budget: SearchBudget { budget: raw.budget, seed: raw.seed },
            window,
        };
        s.check_references()?;
        Ok(s)
    }

    pub fn with_seed(mut self, seed: u64) -> Scenario {
        self.budget.seed = seed;
        self
    }

    fn check_references(&self) -> Result<(), InputError> {
        let diag = |n: &String| self.diagram(n).map(|_| ());
        let fun = |n: &String| self.functor(n).map(|_| ());
        let kan = |k: &KanItem| -> Result<(), InputError> {
            fun(&k.functor)?;
            diag(&k.diagram)?;
            k.against.iter().try_for_each(diag)
        };
        for s in &self.suites {
            match s {
                Suite::Validate => {}
                Suite::GorensteinReport { items } => items.iter().try_for_each(|i| diag(&i.diagram))?,
                Suite::Kan { items } | Suite::Crosscheck { items } => items.iter().try_for_each(kan)?,
                Suite::Approx { diagrams } => diagrams.iter().try_for_each(diag)?,
                Suite::StableEquiv { roundtrip, pairs } => {
                    roundtrip.iter().try_for_each(diag)?;
                    pairs.iter().try_for_each(|p| diag(&p.left).and(diag(&p.right)))?;
                }
                Suite::Sod { complexes, resolutions } => {
                    for c in complexes {
                        self.complex(c)?;
                    }
                    resolutions.iter().try_for_each(diag)?;
                }
                Suite::DerivatorAxioms { der1, der2, der3, der4, der5 } => {
                    der1.iter().try_for_each(|p| diag(&p.left).and(diag(&p.right)))?;
                    der2.iter().chain(der5).try_for_each(diag)?;
                    der3.iter().try_for_each(kan)?;
                    for d in der4 {
                        let u = self.functor(&d.functor)?;
                        u.target.object_index(&d.object).map_err(|e| InputError(format!("der4: {e}")))?;
                        if !self.diagrams.contains_key(&d.input) && !self.complexes.contains_key(&d.input) {
                            return Err(InputError(format!("der4: unknown diagram or complex {}", d.input)));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn diagram(&self, name: &str) -> Result<&Diagram, InputError> {
        self.diagrams.get(name).ok_or_else(|| InputError(format!("unknown diagram {name}")))
    }
    pub fn functor(&self, name: &str) -> Result<&CatFunctor, InputError> {
        self.functors.get(name).ok_or_else(|| InputError(format!("unknown functor {name}")))
    }
    pub fn complex(&self, name: &str) -> Result<&LazyComplex, InputError> {
        self.complexes.get(name).ok_or_else(|| InputError(format!("unknown complex {name}")))
    }
}
