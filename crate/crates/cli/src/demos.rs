//! Built-in demo configurations, one per class family.

use fibering::BSign;

use crate::config::{BranchChoice, ClassKind, GridUnits, InstanceSpec, RunConfig};

pub const NAMES: [&str; 3] = ["two_term", "concave_convex", "sp_like"];

/// p-Laplacian mesh with `p = q = 2`, `r = 4`: curves start at the Dirichlet
/// eigenvalues and fall without bound.
pub fn two_term() -> RunConfig {
    let mut cfg = RunConfig::new(InstanceSpec::PLap1D { p: 2.0, q: 2.0, r: 4.0, m: 63, b_sign: BSign::Positive });
    cfg.levels = 3;
    cfg.c = Some(1.0);
    cfg.c_grid = vec![1e-6, 2.5, 5.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0];
    cfg.mu = Some(0.0);
    cfg
}

/// Two-dimensional concave-convex diagonal instance with `c* = -1/192`.
pub fn concave_convex() -> RunConfig {
    let mut cfg = RunConfig::new(InstanceSpec::Diag {
        class: ClassKind::ConcaveConvex,
        exponents: vec![2.0, 3.0, 4.0],
        n: vec![1.0, 2.0],
        a: vec![1.0, 1.0],
        b: vec![1.0, 1.5],
        b_sign: BSign::Positive,
    });
    cfg.levels = 2;
    cfg.branch = BranchChoice::Both;
    cfg.grid_units = GridUnits::Cstar;
    cfg.c = Some(0.5);
    cfg.c_grid = vec![0.99, 0.9, 0.7, 0.5, 0.3, 0.1, 1e-2, 1e-3, 1e-4, 1e-6, -0.5, -1.0, -2.0, -4.0];
    cfg.point = Some(vec![1.0, 1.0]);
    cfg
}

/// Two-dimensional SP-like surrogate with exponent 2.5.
pub fn sp_like() -> RunConfig {
    let mut cfg = RunConfig::new(InstanceSpec::SpSurrogate { p: 2.5, n: vec![1.0, 2.0], a: vec![1.0, 2.0], b: vec![1.0, 1.0] });
    cfg.levels = 2;
    cfg.branch = BranchChoice::Both;
    cfg.grid_units = GridUnits::Cstar;
    cfg.c = Some(0.5);
    cfg.c_grid = vec![0.99, 0.9, 0.7, 0.5, 0.3, 0.1, 1e-2, 1e-3, 1e-4, -0.1, -0.5, -1.0, -2.0];
    cfg.point = Some(vec![1.0, 1.0]);
    cfg
}

pub fn by_name(name: &str) -> Option<RunConfig> {
    match name {
        "two_term" => Some(two_term()),
        "concave_convex" => Some(concave_convex()),
        "sp_like" => Some(sp_like()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_files_match_the_builtins() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        for name in NAMES {
            let text = std::fs::read_to_string(dir.join(format!("{name}.conf"))).unwrap();
            assert_eq!(RunConfig::parse(&text).unwrap(), by_name(name).unwrap(), "{name}");
        }
    }
}
