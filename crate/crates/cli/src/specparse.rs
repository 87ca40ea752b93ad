//! Compact command-line forms of the experiment-config pieces.
//!
//! Graphs: `er:N,P` (connected symmetric draw), `cycle:N`, `edges:PATH`,
//! `table:PATH` (symmetrized, threshold via flag). Plans: `first-k`,
//! `n0,N0`, `picks:1,3,5`. Supports: `first:K` or `1,2,5`.

use gsp_core::error::{Error, Result};
use gsp_core::graphs_io::{GraphSpec, NoiseSpec, PlanSpec, ShiftKind, SupportSpec};

pub fn parse_graph(s: &str) -> Result<GraphSpec> {
    let bad = |reason: String| Error::InvalidPlan { reason };
    if let Some(rest) = s.strip_prefix("er:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(bad(format!("expected er:N,P, got '{s}'")));
        }
        let n = parts[0]
            .parse()
            .map_err(|e| bad(format!("graph size: {e}")))?;
        let p = parts[1]
            .parse()
            .map_err(|e| bad(format!("edge probability: {e}")))?;
        Ok(GraphSpec::ErdosRenyi {
            n,
            p,
            connected: true,
            symmetric: true,
        })
    } else if let Some(rest) = s.strip_prefix("cycle:") {
        let n = rest.parse().map_err(|e| bad(format!("cycle size: {e}")))?;
        Ok(GraphSpec::DirectedCycle { n })
    } else if let Some(rest) = s.strip_prefix("edges:") {
        Ok(GraphSpec::EdgeList {
            path: rest.to_string(),
            directed: false,
        })
    } else if let Some(rest) = s.strip_prefix("table:") {
        Ok(GraphSpec::WeightedTable {
            path: rest.to_string(),
            symmetrize: true,
            threshold: 0.01,
        })
    } else {
        Err(bad(format!(
            "unknown graph spec '{s}' (expected er:N,P | cycle:N | edges:PATH | table:PATH)"
        )))
    }
}

pub fn parse_shift(s: &str) -> Result<ShiftKind> {
    ShiftKind::parse(s)
}

pub fn parse_noise(kind: &str, sigma2: f64) -> Result<NoiseSpec> {
    match kind {
        "none" => Ok(NoiseSpec::None),
        "observation" => Ok(NoiseSpec::Observation { sigma2 }),
        "signal" => Ok(NoiseSpec::Signal { sigma2 }),
        "frequency" => Ok(NoiseSpec::Frequency { sigma2 }),
        other => Err(Error::InvalidModel(format!(
            "unknown noise kind '{other}' (none | observation | signal | frequency)"
        ))),
    }
}

pub fn parse_plan(s: &str) -> Result<PlanSpec> {
    if s == "first-k" {
        return Ok(PlanSpec::FirstK);
    }
    if let Some(rest) = s.strip_prefix("picks:") {
        let picks = parse_index_list(rest)?;
        return Ok(PlanSpec::Picks { picks });
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() == 2 {
        let n0 = parts[0].parse().map_err(|_| Error::InvalidPlan {
            reason: format!("bad n0 in plan '{s}'"),
        })?;
        let spacing = parts[1].parse().map_err(|_| Error::InvalidPlan {
            reason: format!("bad N0 in plan '{s}'"),
        })?;
        return Ok(PlanSpec::Structured { n0, spacing });
    }
    Err(Error::InvalidPlan {
        reason: format!("unknown plan '{s}' (first-k | n0,N0 | picks:i,j,k)"),
    })
}

pub fn parse_support(s: &str) -> Result<SupportSpec> {
    if let Some(rest) = s.strip_prefix("first:") {
        let k = rest.parse().map_err(|_| Error::InvalidSupport {
            reason: format!("bad bandwidth in '{s}'"),
        })?;
        return Ok(SupportSpec::FirstK { k });
    }
    Ok(SupportSpec::Indices {
        indices: parse_index_list(s)?,
    })
}

pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim().parse().map_err(|_| Error::InvalidPlan {
                reason: format!("bad index '{t}'"),
            })
        })
        .collect()
}

pub fn parse_float_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim().parse().map_err(|_| Error::InvalidPlan {
                reason: format!("bad number '{t}'"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_specs_parse() {
        assert!(matches!(
            parse_graph("er:20,0.2").unwrap(),
            GraphSpec::ErdosRenyi { n: 20, .. }
        ));
        assert!(matches!(
            parse_graph("cycle:12").unwrap(),
            GraphSpec::DirectedCycle { n: 12 }
        ));
        assert!(parse_graph("mystery:1").is_err());
    }

    #[test]
    fn plan_specs_parse() {
        assert!(matches!(parse_plan("first-k").unwrap(), PlanSpec::FirstK));
        assert!(matches!(
            parse_plan("2,3").unwrap(),
            PlanSpec::Structured { n0: 2, spacing: 3 }
        ));
        assert_eq!(
            parse_plan("picks:1,4,6").unwrap(),
            PlanSpec::Picks {
                picks: vec![1, 4, 6]
            }
        );
    }
}
