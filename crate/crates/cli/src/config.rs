//! Flat `key = value` run configuration.
//!
//! Lines hold one assignment each; `#` starts a comment. Lists are comma
//! separated. Every error names the offending line or the missing key.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use fibering::{
    make_diag, make_plap1d_signed, make_sp_surrogate, BSign, Branch, ClassTag, FunctionalTriple, OptimizerConfig,
    TraceConfig,
};

use crate::error::{CliError, CliResult};

/// Which surrogate family to build.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    /// Finite-difference p-Laplacian on `m` interior nodes of `(0, 1)`.
    PLap1D { p: f64, q: f64, r: f64, m: usize, b_sign: BSign },
    /// Diagonal weighted power sums.
    Diag { class: ClassKind, exponents: Vec<f64>, n: Vec<f64>, a: Vec<f64>, b: Vec<f64>, b_sign: BSign },
    /// SP-like surrogate with `A = N^p`-type structure.
    SpSurrogate { p: f64, n: Vec<f64>, a: Vec<f64>, b: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassKind {
    TwoTerm,
    ConcaveConvex,
    SpLike,
}

/// Branch selection for commands that can run more than one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchChoice {
    /// The natural branch for two-term classes, both otherwise.
    Auto,
    Plus,
    Minus,
    Both,
}

/// Whether `c` and `c_grid` are absolute energies or multiples of `c*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridUnits {
    Absolute,
    Cstar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub c: Option<f64>,
    pub c_grid: Vec<f64>,
    pub grid_units: GridUnits,
    pub levels: usize,
    pub branch: BranchChoice,
    pub mu: Option<f64>,
    pub point: Option<Vec<f64>>,
    pub nodal: bool,
    pub trace: TraceConfig,
    pub out_dir: PathBuf,
    pub selftest_mesh: usize,
    pub selftest_corrupt: bool,
}

impl RunConfig {
    pub fn new(instance: InstanceSpec) -> Self {
        RunConfig {
            instance,
            c: None,
            c_grid: Vec::new(),
            grid_units: GridUnits::Absolute,
            levels: 1,
            branch: BranchChoice::Auto,
            mu: None,
            point: None,
            nodal: false,
            trace: TraceConfig::default(),
            out_dir: PathBuf::from("out"),
            selftest_mesh: 63,
            selftest_corrupt: false,
        }
    }

    pub fn optimizer(&self) -> &OptimizerConfig {
        &self.trace.optimizer
    }

    pub fn build(&self) -> CliResult<FunctionalTriple> {
        Ok(match &self.instance {
            InstanceSpec::PLap1D { p, q, r, m, b_sign } => make_plap1d_signed(*p, *q, *r, *m, *b_sign)?,
            InstanceSpec::Diag { class, exponents, n, a, b, b_sign } => make_diag(class_tag(*class, exponents, *b_sign)?, n, a, b)?,
            InstanceSpec::SpSurrogate { p, n, a, b } => make_sp_surrogate(n, a, b, *p)?,
        })
    }

    /// Branches selected for `triple`.
    pub fn branches(&self, triple: &FunctionalTriple) -> Vec<Branch> {
        match self.branch {
            BranchChoice::Plus => vec![Branch::Plus],
            BranchChoice::Minus => vec![Branch::Minus],
            BranchChoice::Both => vec![Branch::Plus, Branch::Minus],
            BranchChoice::Auto => {
                let class = triple.class();
                if class.family() == fibering::Family::TwoTerm {
                    [Branch::Plus, Branch::Minus]
                        .into_iter()
                        .filter(|b| class.admissible_interval(*b, None).is_some())
                        .collect()
                } else {
                    vec![Branch::Plus, Branch::Minus]
                }
            }
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut raw = Raw::read(text)?;
        let instance = match raw.take_str("instance")?.as_str() {
            "plap1d" => InstanceSpec::PLap1D {
                p: raw.req_f64("p")?,
                q: raw.req_f64("q")?,
                r: raw.req_f64("r")?,
                m: raw.req_usize("m")?,
                b_sign: raw.opt_sign()?,
            },
            "diag" => InstanceSpec::Diag {
                class: match raw.take_str("class")?.as_str() {
                    "two_term" => ClassKind::TwoTerm,
                    "concave_convex" => ClassKind::ConcaveConvex,
                    "sp_like" => ClassKind::SpLike,
                    other => return Err(raw.invalid("class", format!("unknown class `{other}`"))),
                },
                exponents: raw.req_list("exponents")?,
                n: raw.req_list("weights_n")?,
                a: raw.req_list("weights_a")?,
                b: raw.req_list("weights_b")?,
                b_sign: raw.opt_sign()?,
            },
            "sp_surrogate" => InstanceSpec::SpSurrogate {
                p: raw.req_f64("p")?,
                n: raw.req_list("weights_n")?,
                a: raw.req_list("weights_a")?,
                b: raw.req_list("weights_b")?,
            },
            other => return Err(raw.invalid("instance", format!("unknown instance `{other}`"))),
        };
        let mut cfg = RunConfig::new(instance);
        if let InstanceSpec::Diag { class, exponents, .. } = &cfg.instance {
            let want = if *class == ClassKind::TwoTerm { 2 } else { 3 };
            if exponents.len() != want {
                return Err(raw.invalid("exponents", format!("expected {want} exponents, got {}", exponents.len())));
            }
        }
        cfg.c = raw.opt_f64("c")?;
        if raw.has("c_grid") {
            cfg.c_grid = raw.req_list("c_grid")?;
        }
        if raw.has("grid_units") {
            cfg.grid_units = match raw.take_str("grid_units")?.as_str() {
                "absolute" => GridUnits::Absolute,
                "cstar" => GridUnits::Cstar,
                other => return Err(raw.invalid("grid_units", format!("expected absolute or cstar, got `{other}`"))),
            };
        }
        if raw.has("levels") {
            cfg.levels = raw.req_usize("levels")?;
        }
        if raw.has("branch") {
            cfg.branch = match raw.take_str("branch")?.as_str() {
                "auto" => BranchChoice::Auto,
                "plus" => BranchChoice::Plus,
                "minus" => BranchChoice::Minus,
                "both" => BranchChoice::Both,
                other => return Err(raw.invalid("branch", format!("expected auto, plus, minus or both, got `{other}`"))),
            };
        }
        cfg.mu = raw.opt_f64("mu")?;
        if raw.has("point") {
            cfg.point = Some(raw.req_list("point")?);
        }
        if raw.has("nodal") {
            cfg.nodal = raw.req_bool("nodal")?;
        }
        if raw.has("out_dir") {
            cfg.out_dir = PathBuf::from(raw.take_str("out_dir")?);
        }
        if raw.has("selftest_mesh") {
            cfg.selftest_mesh = raw.req_usize("selftest_mesh")?;
        }
        if raw.has("selftest_corrupt") {
            cfg.selftest_corrupt = raw.req_bool("selftest_corrupt")?;
        }

        let tr = &mut cfg.trace;
        macro_rules! set {
            ($key:literal, $field:expr, $get:ident) => {
                if raw.has($key) {
                    $field = raw.$get($key)?;
                }
            };
        }
        set!("seed", tr.optimizer.seed, req_u64);
        set!("grad_tol", tr.optimizer.grad_tol, req_f64);
        set!("max_iters", tr.optimizer.max_iters, req_usize);
        set!("memory", tr.optimizer.memory, req_usize);
        set!("multistart", tr.optimizer.multistart, req_usize);
        set!("axis_starts", tr.optimizer.axis_starts, req_usize);
        set!("outer_max_iters", tr.optimizer.outer_max_iters, req_usize);
        set!("verify_grad", tr.optimizer.verify.grad, req_f64);
        set!("verify_energy", tr.optimizer.verify.energy, req_f64);
        set!("refine_rounds", tr.refine_rounds, req_usize);
        set!("refine_budget", tr.refine_budget, req_f64);
        set!("cstar_margin", tr.cstar_margin, req_f64);
        set!("clip", tr.clip, req_bool);
        raw.finish()?;
        cfg.trace.optimizer.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; `parse(to_text(cfg)) == cfg`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let sign = |b: &BSign| match b {
            BSign::Positive => "positive",
            BSign::Negative => "negative",
        };
        let _ = match &self.instance {
            InstanceSpec::PLap1D { p, q, r, m, b_sign } => writeln!(
                s,
                "instance = plap1d\np = {p:?}\nq = {q:?}\nr = {r:?}\nm = {m}\nb_sign = {}",
                sign(b_sign)
            ),
            InstanceSpec::Diag { class, exponents, n, a, b, b_sign } => writeln!(
                s,
                "instance = diag\nclass = {}\nexponents = {}\nweights_n = {}\nweights_a = {}\nweights_b = {}\nb_sign = {}",
                match class {
                    ClassKind::TwoTerm => "two_term",
                    ClassKind::ConcaveConvex => "concave_convex",
                    ClassKind::SpLike => "sp_like",
                },
                list(exponents),
                list(n),
                list(a),
                list(b),
                sign(b_sign)
            ),
            InstanceSpec::SpSurrogate { p, n, a, b } => writeln!(
                s,
                "instance = sp_surrogate\np = {p:?}\nweights_n = {}\nweights_a = {}\nweights_b = {}",
                list(n),
                list(a),
                list(b)
            ),
        };
        if let Some(c) = self.c {
            let _ = writeln!(s, "c = {c:?}");
        }
        if !self.c_grid.is_empty() {
            let _ = writeln!(s, "c_grid = {}", list(&self.c_grid));
        }
        let units = match self.grid_units {
            GridUnits::Absolute => "absolute",
            GridUnits::Cstar => "cstar",
        };
        let branch = match self.branch {
            BranchChoice::Auto => "auto",
            BranchChoice::Plus => "plus",
            BranchChoice::Minus => "minus",
            BranchChoice::Both => "both",
        };
        let _ = writeln!(s, "grid_units = {units}\nlevels = {}\nbranch = {branch}", self.levels);
        if let Some(mu) = self.mu {
            let _ = writeln!(s, "mu = {mu:?}");
        }
        if let Some(p) = &self.point {
            let _ = writeln!(s, "point = {}", list(p));
        }
        let o = &self.trace.optimizer;
        let _ = writeln!(
            s,
            "nodal = {}\nout_dir = {}\nselftest_mesh = {}\nselftest_corrupt = {}\n\
             seed = {}\ngrad_tol = {:?}\nmax_iters = {}\nmemory = {}\nmultistart = {}\naxis_starts = {}\n\
             outer_max_iters = {}\nverify_grad = {:?}\nverify_energy = {:?}\n\
             refine_rounds = {}\nrefine_budget = {:?}\ncstar_margin = {:?}\nclip = {}",
            self.nodal,
            self.out_dir.display(),
            self.selftest_mesh,
            self.selftest_corrupt,
            o.seed,
            o.grad_tol,
            o.max_iters,
            o.memory,
            o.multistart,
            o.axis_starts,
            o.outer_max_iters,
            o.verify.grad,
            o.verify.energy,
            self.trace.refine_rounds,
            self.trace.refine_budget,
            self.trace.cstar_margin,
            self.trace.clip,
        );
        s
    }
}

pub fn class_tag(kind: ClassKind, e: &[f64], b_sign: BSign) -> CliResult<ClassTag> {
    let get = |i: usize| {
        e.get(i).copied().ok_or_else(|| CliError::Invalid { key: "exponents".into(), msg: format!("missing exponent {}", i + 1) })
    };
    let mut tag = match kind {
        ClassKind::TwoTerm => return Ok(ClassTag::two_term(get(0)?, get(1)?, b_sign)?),
        ClassKind::ConcaveConvex => ClassTag::concave_convex(get(0)?, get(1)?, get(2)?)?,
        ClassKind::SpLike => ClassTag::sp_like(get(0)?, get(1)?, get(2)?)?,
    };
    tag.b_sign = b_sign;
    tag.validate()?;
    Ok(tag)
}

/// Key-value pairs with the line each came from.
struct Raw {
    entries: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn read(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(CliError::Parse { line: line_no, msg: format!("expected `key = value`, got `{body}`") });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
                return Err(CliError::Parse { line: line_no, msg: format!("bad key `{k}`") });
            }
            if v.is_empty() {
                return Err(CliError::Parse { line: line_no, msg: format!("empty value for `{k}`") });
            }
            if let Some((prev, _)) = entries.insert(k.to_string(), (line_no, v.to_string())) {
                return Err(CliError::Parse { line: line_no, msg: format!("duplicate key `{k}` (first set on line {prev})") });
            }
        }
        Ok(Raw { entries })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn take(&mut self, key: &str) -> CliResult<(usize, String)> {
        self.entries.remove(key).ok_or_else(|| CliError::MissingKey(key.to_string()))
    }

    fn invalid(&self, key: &str, msg: String) -> CliError {
        CliError::Invalid { key: key.to_string(), msg }
    }

    fn take_str(&mut self, key: &str) -> CliResult<String> {
        Ok(self.take(key)?.1)
    }

    fn typed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> CliResult<T> {
        let (line, v) = self.take(key)?;
        v.parse().map_err(|_| CliError::Parse { line, msg: format!("`{key}` expects {what}, got `{v}`") })
    }

    fn req_f64(&mut self, key: &str) -> CliResult<f64> {
        self.typed(key, "a number")
    }

    fn opt_f64(&mut self, key: &str) -> CliResult<Option<f64>> {
        if self.has(key) {
            self.req_f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn req_usize(&mut self, key: &str) -> CliResult<usize> {
        self.typed(key, "a non-negative integer")
    }

    fn req_u64(&mut self, key: &str) -> CliResult<u64> {
        self.typed(key, "a non-negative integer")
    }

    fn req_bool(&mut self, key: &str) -> CliResult<bool> {
        self.typed(key, "true or false")
    }

    fn req_list(&mut self, key: &str) -> CliResult<Vec<f64>> {
        let (line, v) = self.take(key)?;
        v.split(',')
            .map(|x| {
                x.trim().parse::<f64>().map_err(|_| CliError::Parse { line, msg: format!("`{key}` has a bad entry `{}`", x.trim()) })
            })
            .collect()
    }

    fn opt_sign(&mut self) -> CliResult<BSign> {
        if !self.has("b_sign") {
            return Ok(BSign::Positive);
        }
        let (line, v) = self.take("b_sign")?;
        match v.as_str() {
            "positive" => Ok(BSign::Positive),
            "negative" => Ok(BSign::Negative),
            _ => Err(CliError::Parse { line, msg: format!("`b_sign` expects positive or negative, got `{v}`") }),
        }
    }

    /// Rejects keys nobody consumed.
    fn finish(self) -> CliResult<()> {
        match self.entries.into_iter().min_by_key(|(_, (line, _))| *line) {
            Some((k, (line, _))) => Err(CliError::Parse { line, msg: format!("unknown or unused key `{k}`") }),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAP: &str = "instance = plap1d  # mesh\np = 2\nq = 2\nr = 4\nm = 31\n";

    #[test]
    fn minimal_file_parses_with_defaults() {
        let cfg = RunConfig::parse(PLAP).unwrap();
        assert_eq!(cfg.instance, InstanceSpec::PLap1D { p: 2.0, q: 2.0, r: 4.0, m: 31, b_sign: BSign::Positive });
        assert_eq!(cfg.trace, TraceConfig::default());
        assert_eq!(cfg.build().unwrap().dim(), 31);
    }

    #[test]
    fn missing_exponent_is_named() {
        let err = RunConfig::parse("instance = plap1d\np = 2\nq = 2\nm = 31\n").unwrap_err();
        assert!(matches!(&err, CliError::MissingKey(k) if k == "r"), "{err}");
        assert!(err.to_string().contains("`r`"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = format!("{PLAP}\n# comment\ngrad_tol = fast\n");
        match RunConfig::parse(&text).unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 8),
            other => panic!("{other}"),
        }
        assert!(matches!(RunConfig::parse(&format!("{PLAP}bogus = 1\n")), Err(CliError::Parse { line: 6, .. })));
        assert!(matches!(RunConfig::parse(&format!("{PLAP}p = 3\n")), Err(CliError::Parse { line: 6, .. })));
        assert!(matches!(RunConfig::parse("instance plap1d\n"), Err(CliError::Parse { line: 1, .. })));
    }

    #[test]
    fn diag_exponent_count_is_checked() {
        let text = "instance = diag\nclass = concave_convex\nexponents = 2, 3\nweights_n = 1\nweights_a = 1\nweights_b = 1\n";
        assert!(matches!(RunConfig::parse(text), Err(CliError::Invalid { .. })));
    }
}
