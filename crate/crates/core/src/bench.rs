//! Approximation-ratio sweeps of local search against the exact oracles.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{exact_ds, exact_is};
use crate::geom::ShapeKind;
use crate::instance::{generate_random, GeneratorConfig, Instance, Problem};
use crate::local_search::{local_search, LocalSearchConfig};

pub const CSV_HEADER: &str = "instance_id,problem,shape,m,n,t,ls_size,exact_size,ratio,exchanges,elapsed_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance_id: String,
    pub problem: Problem,
    pub shape: String,
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub ls_size: usize,
    /// Present only when the exact oracle finished within budget.
    pub exact_size: Option<usize>,
    pub ratio: Option<f64>,
    pub exchanges: usize,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub problems: Vec<Problem>,
    pub ts: Vec<usize>,
    pub node_budget: u64,
    pub order_seed: u64,
    /// Writes 0 for `elapsed_ms` so that output is byte-identical across runs.
    pub omit_timing: bool,
}

/// Seeded corpus; ids encode everything needed to regenerate an instance.
pub fn corpus(count: usize, base_seed: u64, m: usize, n: usize, kinds: &[ShapeKind]) -> Result<Vec<(String, Instance)>> {
    let mut out = Vec::with_capacity(count * kinds.len());
    for &kind in kinds {
        for k in 0..count as u64 {
            let seed = base_seed + k;
            let inst = generate_random(&GeneratorConfig::new(seed, m, n, kind))?;
            out.push((format!("{kind}-s{seed}-m{m}-n{n}"), inst));
        }
    }
    Ok(out)
}

fn shape_of(inst: &Instance) -> String {
    let mut kinds = inst.objects().iter().map(|o| o.kind);
    match kinds.next() {
        None => "empty".into(),
        Some(first) if kinds.all(|k| k == first) => first.to_string(),
        Some(_) => "mixed".into(),
    }
}

/// One record per instance, problem and `t`, in input order regardless of
/// how the instances are scheduled across threads.
pub fn run_bench(instances: &[(String, Instance)], opts: &BenchOptions) -> Result<Vec<BenchRecord>> {
    let per_instance: Vec<Result<Vec<BenchRecord>>> = instances
        .par_iter()
        .map(|(id, inst)| {
            let mut rows = Vec::new();
            for &problem in &opts.problems {
                let exact = match problem {
                    Problem::Is => exact_is(inst, opts.node_budget),
                    Problem::Ds => exact_ds(inst, opts.node_budget),
                };
                let exact_size = exact.proven.then_some(exact.optimum);
                for &t in &opts.ts {
                    let cfg = LocalSearchConfig { order_seed: opts.order_seed, ..LocalSearchConfig::new(t) };
                    let (sol, trace) = local_search(inst, problem, &cfg)?;
                    let ratio = exact_size.filter(|&e| e > 0).map(|e| sol.size() as f64 / e as f64);
                    rows.push(BenchRecord {
                        instance_id: id.clone(),
                        problem,
                        shape: shape_of(inst),
                        m: inst.m(),
                        n: inst.n(),
                        t,
                        ls_size: sol.size(),
                        exact_size,
                        ratio,
                        exchanges: trace.exchanges.len(),
                        elapsed_ms: if opts.omit_timing { 0 } else { trace.elapsed.as_millis() },
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for rows in per_instance {
        out.extend(rows?);
    }
    Ok(out)
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.instance_id,
            r.problem,
            r.shape,
            r.m,
            r.n,
            r.t,
            r.ls_size,
            r.exact_size.map(|e| e.to_string()).unwrap_or_default(),
            r.ratio.map(|x| format!("{x:.6}")).unwrap_or_default(),
            r.exchanges,
            r.elapsed_ms,
        );
    }
    out
}

/// Mean ratio per problem and `t` over records with a proven ratio.
pub fn mean_ratios(records: &[BenchRecord]) -> BTreeMap<(String, usize), f64> {
    let mut acc: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for r in records {
        if let Some(x) = r.ratio {
            let e = acc.entry((r.problem.to_string(), r.t)).or_default();
            e.0 += x;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::DEFAULT_NODE_BUDGET;

    fn opts(omit_timing: bool) -> BenchOptions {
        BenchOptions {
            problems: vec![Problem::Is, Problem::Ds],
            ts: vec![1, 2, 3],
            node_budget: DEFAULT_NODE_BUDGET,
            order_seed: 0,
            omit_timing,
        }
    }

    #[test]
    fn row_count_and_header() {
        let c = corpus(4, 100, 8, 20, &[ShapeKind::Disk]).unwrap();
        let rec = run_bench(&c, &opts(true)).unwrap();
        assert_eq!(rec.len(), 4 * 2 * 3);
        let csv = to_csv(&rec);
        assert_eq!(csv.lines().next(), Some(CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + rec.len());
    }

    #[test]
    fn ratios_are_on_the_right_side() {
        let c = corpus(6, 7, 10, 25, &[ShapeKind::Disk, ShapeKind::Square]).unwrap();
        for r in run_bench(&c, &opts(true)).unwrap() {
            let ratio = r.ratio.expect("small instances are always proven");
            match r.problem {
                Problem::Is => assert!(ratio <= 1.0),
                Problem::Ds => assert!(ratio >= 1.0),
            }
        }
    }

    #[test]
    fn deterministic_csv() {
        let c = corpus(5, 42, 9, 20, &[ShapeKind::Square]).unwrap();
        let a = to_csv(&run_bench(&c, &opts(true)).unwrap());
        let b = to_csv(&run_bench(&c, &opts(true)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn unproven_exact_leaves_ratio_empty() {
        let c = corpus(1, 3, 12, 30, &[ShapeKind::Disk]).unwrap();
        let mut o = opts(true);
        o.node_budget = 0;
        let rec = run_bench(&c, &o).unwrap();
        assert!(rec.iter().all(|r| r.exact_size.is_none() && r.ratio.is_none()));
        let line = to_csv(&rec).lines().nth(1).unwrap().to_string();
        assert!(line.contains(",,,"), "{line}");
    }
}
