use std::path::Path;

use latdisp_core::{build_finite_graph, FiniteGraph, GraphSpec};

use crate::Failure;

/// Example crystals shipped with the binary.
pub const BUILTIN_SPECS: &[(&str, &str)] = &[
    ("ladder", include_str!("../specs/ladder.json")),
    ("ladder_potential", include_str!("../specs/ladder_potential.json")),
    ("strip4", include_str!("../specs/strip4.json")),
    ("cylinder3", include_str!("../specs/cylinder3.json")),
    ("cylinder3_potential", include_str!("../specs/cylinder3_potential.json")),
    ("star3", include_str!("../specs/star3.json")),
];

/// Reads a graph spec from a file, falling back to the builtin names.
pub fn load_graph(source: &str) -> Result<FiniteGraph, Failure> {
    let text = if Path::new(source).exists() {
        std::fs::read_to_string(source).map_err(|e| Failure::Usage(format!("cannot read {source}: {e}")))?
    } else if let Some((_, text)) = BUILTIN_SPECS.iter().find(|(name, _)| *name == source) {
        text.to_string()
    } else {
        return Err(Failure::Usage(format!(
            "graph spec `{source}` is neither a file nor a builtin name"
        )));
    };
    let spec: GraphSpec =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("graph spec {source}: {e}")))?;
    build_finite_graph(&spec).map_err(|e| Failure::Usage(format!("graph spec {source}: {e}")))
}

pub fn parse_offset(text: &str, d: usize) -> Result<Vec<i64>, Failure> {
    let nu = text
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("--offset `{text}`: {e}")))?;
    if nu.len() != d {
        return Err(Failure::Usage(format!(
            "--offset has {} components, expected d = {d}",
            nu.len()
        )));
    }
    Ok(nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        for (name, _) in BUILTIN_SPECS {
            load_graph(name).unwrap();
        }
        assert_eq!(load_graph("star3").unwrap().k(), 4);
    }

    #[test]
    fn offsets() {
        assert_eq!(parse_offset("3", 1).unwrap(), vec![3]);
        assert_eq!(parse_offset("-1, 2", 2).unwrap(), vec![-1, 2]);
        assert!(parse_offset("1,2", 1).is_err());
        assert!(parse_offset("x", 1).is_err());
    }
}
