//! Built-in system catalog.
//!
//! Four small systems cover the axes the rest of the crate cares about:
//! scalar vs. coupled, genuinely nonlinear vs. weakly linearly degenerate,
//! and source-free vs. matched source. Each is stored as a keyed text
//! document identical to what a user would pass in, so the catalog
//! exercises the same parsing path as external files.

use crate::dsl::{parse_system_definition, SystemDefinition};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Names accepted by [`builtin_system`], in catalog order.
pub const BUILTIN_SYSTEMS: [&str; 4] =
    ["burgers", "decoupled-pair", "wld-pair", "matched-source"];

/// The document text behind a catalog name.
pub fn builtin_system_source(name: &str) -> Option<&'static str> {
    match name {
        "burgers" => Some(
            r#"
name = "burgers"
n = 1
A = ["u1"]
B = ["0"]
"#,
        ),
        "decoupled-pair" => Some(
            r#"
name = "decoupled-pair"
n = 2
A = ["u1", "0", "0", "1 + u2"]
B = ["0", "0"]
"#,
        ),
        "wld-pair" => Some(
            r#"
name = "wld-pair"
n = 2
A = ["u1^2", "0", "0", "1 + u2"]
B = ["0", "0"]
"#,
        ),
        "matched-source" => Some(
            r#"
name = "matched-source"
n = 2
A = ["u1", "0", "0", "1 + u2"]
B = ["u1 * u2", "0"]
"#,
        ),
        _ => None,
    }
}

/// Parses the named catalog entry.
pub fn builtin_system<T: Real>(name: &str) -> Result<SystemDefinition<T>> {
    let source = builtin_system_source(name).ok_or_else(|| {
        Error::invalid(format!(
            "unknown system '{name}'; built-ins are {}",
            BUILTIN_SYSTEMS.join(", ")
        ))
    })?;
    parse_system_definition(source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::HyperbolicSystem;

    #[test]
    fn every_catalog_entry_parses_and_keeps_its_name() {
        for name in BUILTIN_SYSTEMS {
            let sys = builtin_system::<f64>(name).unwrap();
            assert_eq!(sys.name(), name);
        }
    }

    #[test]
    fn catalog_matrices_match_their_definitions() {
        let burgers = builtin_system::<f64>("burgers").unwrap();
        assert_eq!(burgers.dim(), 1);
        let a = burgers.matrix(&[0.3]).unwrap();
        assert_eq!(a[(0, 0)], 0.3);

        let wld = builtin_system::<f64>("wld-pair").unwrap();
        let a = wld.matrix(&[0.2, -0.1]).unwrap();
        assert!((a[(0, 0)] - 0.04).abs() < 1e-15);
        assert_eq!(a[(0, 1)], 0.0);
        assert_eq!(a[(1, 0)], 0.0);
        assert!((a[(1, 1)] - 0.9).abs() < 1e-15);

        let matched = builtin_system::<f64>("matched-source").unwrap();
        let b = matched.source(&[0.2, 0.5]).unwrap();
        assert!((b[0] - 0.1).abs() < 1e-15);
        assert_eq!(b[1], 0.0);
    }

    #[test]
    fn source_free_entries_have_zero_sources() {
        for name in ["burgers", "decoupled-pair", "wld-pair"] {
            let sys = builtin_system::<f64>(name).unwrap();
            let u = vec![0.3; sys.dim()];
            let b = sys.source(&u).unwrap();
            assert!(b.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn unknown_name_lists_the_catalog() {
        let err = builtin_system::<f64>("euler").unwrap_err().to_string();
        assert!(err.contains("euler"), "{err}");
        assert!(err.contains("burgers"), "{err}");
        assert!(err.contains("matched-source"), "{err}");
    }
}
