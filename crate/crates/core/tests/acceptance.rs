//! Acceptance run: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use fiberloom::bezier::*;
use fiberloom::export::{path_export, render_svg};
use fiberloom::graph::{Edge, FiberGraph, Vertex};
use fiberloom::ilp::{solve, IntegerProgram};
use fiberloom::pattern::*;
use fiberloom::plan::{check_plan, connector_length, parameterize_junction, Planner};
use fiberloom::report::{derive_report, pattern_table, PatternRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn params(p: f64, n_layers: usize) -> OptimizationParams {
    OptimizationParams {
        n_layers,
        p,
        ..Default::default()
    }
}

fn c1_connections() -> Outcome {
    let t = Instant::now();
    let g = common::fixture("minimal").graph;
    let secs = t.elapsed().as_secs_f64();
    let pairs: Vec<(usize, usize)> = g.connections.iter().map(|c| (c.edge1, c.edge2)).collect();
    let want = [(0, 1), (0, 4), (0, 6), (1, 2), (1, 4), (2, 3), (3, 4), (3, 5), (4, 5), (5, 6)];
    ensure(pairs == want, || format!("edge pairs {pairs:?}"))?;
    let targets: Vec<f64> = g.connections.iter().map(|c| c.target).collect();
    ensure(targets == [2., 3., 2., 2., 3., 2., 3., 2., 3., 2.], || format!("targets {targets:?}"))?;
    let loops: Vec<Vec<usize>> = (0..10)
        .map(|c| g.loops_using_connection(c).iter().map(|l| l.1).collect())
        .collect();
    let printed: [&[usize]; 10] = [&[2], &[0], &[0, 2], &[1, 2], &[1], &[1, 2], &[1], &[2], &[0], &[0, 2]];
    ensure(loops == printed, || format!("loop memberships {loops:?}"))?;
    ensure(secs < 1.0, || format!("took {secs:.3} s"))?;
    Ok(format!("10 connections exact, {secs:.3} s < 1 s"))
}

fn c2_matrices() -> Outcome {
    let g = common::fixture("minimal").graph;
    let c: Vec<Vec<f64>> = [
        [0., 0., 1.], [1., 0., 0.], [1., 0., 1.], [0., 1., 1.], [0., 1., 0.],
        [0., 1., 1.], [0., 1., 0.], [0., 0., 1.], [1., 0., 0.], [1., 0., 1.],
    ]
    .map(|r| r.to_vec())
    .to_vec();
    let e: Vec<Vec<f64>> = [[1., 0., 1.], [0., 1., 1.], [0., 1., 1.], [0., 1., 1.], [1., 1., 0.], [1., 0., 1.], [1., 0., 1.]]
        .map(|r| r.to_vec())
        .to_vec();
    ensure(g.sheets[0].c.to_rows() == c, || "C differs".into())?;
    ensure(g.sheets[0].e.to_rows() == e, || "E differs".into())?;
    ensure(g.edge_targets == [2., 2., 2., 2., 3., 2., 2.], || "edge targets differ".into())?;
    Ok("C (10x3) and E (7x3) exact".into())
}

fn c3_objectives() -> Outcome {
    let g = common::fixture("minimal").graph;
    let h = PatternHistory::new(&g);
    let xs = [[2u64, 1, 0], [1, 2, 0], [1, 1, 1], [0, 0, 2]];
    let mut got = Vec::new();
    for (p, want) in [(1.0, [30., 30., 32., 24.]), (2.0, [78., 78., 76., 48.])] {
        let w = objective_vector(&g, &params(p, 1), 0, 1, &h).map_err(|e| e.to_string())?;
        let prog = IntegerProgram::new(w);
        let vals: Vec<f64> = xs.iter().map(|x| prog.objective_at(x)).collect();
        ensure(vals == want, || format!("p={p}: {vals:?}"))?;
        got.push(vals);
    }
    Ok(format!("p=1 {:?}, p=2 {:?} exact", got[0], got[1]))
}

const TABLE_X: [[u64; 3]; 6] = [[2, 1, 0], [1, 2, 0], [1, 1, 1], [2, 1, 0], [1, 2, 0], [1, 1, 1]];
const MIRROR: [usize; 3] = [1, 0, 2];

fn c4_six_layers() -> Outcome {
    let g = common::fixture("minimal").graph;
    let t = Instant::now();
    let h = solve_all_layers(&g, &params(2.0, 6)).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let xs: Vec<[u64; 3]> = h.layers.iter().map(|l| [l.x[0], l.x[1], l.x[2]]).collect();
    let mirrored = TABLE_X.map(|x| MIRROR.map(|i| x[i]));
    let is_mirror = xs == mirrored;
    ensure(xs == TABLE_X || is_mirror, || format!("x* = {xs:?}"))?;
    // The published row for layer 2 reads (40,48,58). With x1 = (2,1,0)
    // the residuals are 6-2 = 4 on the two weight-3 connections of loop 0
    // and 6-1 = 5 on those of loop 1, giving 2*16+2*4 = 40 and
    // 2*25+2*9 = 68; the printed 48 contradicts the table's own choice of
    // (1,2,0) at that layer.
    let mut want = [
        [26., 26., 24.],
        [40., 68., 58.],
        [90., 90., 108.],
        [146., 146., 134.],
        [180., 232., 212.],
        [274., 274., 306.],
    ];
    if is_mirror {
        want = want.map(|w| MIRROR.map(|i| w[i]));
    }
    for (l, w) in h.layers.iter().zip(&want) {
        ensure(l.weights == w, || format!("layer {}: c = {:?}", l.layer, l.weights))?;
    }
    ensure(secs < 1.0, || format!("took {secs:.3} s"))?;
    Ok(format!(
        "x* {} table, c exact incl. layer 2 = (40,68,58), {secs:.3} s < 1 s",
        if is_mirror { "mirrors" } else { "equals" }
    ))
}

fn c5_connection_report() -> Outcome {
    let g = common::fixture("minimal").graph;
    let h = solve_all_layers(&g, &params(2.0, 6)).map_err(|e| e.to_string())?;
    let rows = connection_report(&h, &g);
    let sums = [
        "2 vs. 12", "8 vs. 18", "10 vs. 12", "10 vs. 12", "8 vs. 18",
        "10 vs. 12", "8 vs. 18", "2 vs. 12", "8 vs. 18", "10 vs. 12",
    ];
    let mut usage = [
        "0 0 1 0 0 1", "2 1 1 2 1 1", "2 1 2 2 1 2", "1 2 2 1 2 2", "1 2 1 1 2 1",
        "1 2 2 1 2 2", "1 2 1 1 2 1", "0 0 1 0 0 1", "2 1 1 2 1 1", "2 1 2 2 1 2",
    ];
    if h.layers[0].x == [1, 2, 0] {
        for (a, b) in [(1, 4), (8, 6), (2, 3), (9, 5)] {
            usage.swap(a, b);
        }
    }
    for (r, (s, u)) in rows.iter().zip(sums.iter().zip(&usage)) {
        ensure(r.sum_string() == *s && r.usage_string() == *u, || {
            format!("connection {}: {} / {}", r.connection, r.sum_string(), r.usage_string())
        })?;
    }
    Ok("10 sums and usage strings exact".into())
}

fn brute_max(obj: &[f64], ub: &[u64], rows: &[(Vec<f64>, f64)]) -> Option<f64> {
    let mut best = None::<f64>;
    let mut x = vec![0u64; ub.len()];
    loop {
        if rows.iter().all(|(r, b)| r.iter().zip(&x).map(|(a, &v)| a * v as f64).sum::<f64>() <= *b) {
            let v = obj.iter().zip(&x).map(|(c, &v)| c * v as f64).sum::<f64>();
            best = Some(best.map_or(v, |b| b.max(v)));
        }
        let mut i = 0;
        while i < x.len() && x[i] == ub[i] {
            x[i] = 0;
            i += 1;
        }
        if i == x.len() {
            return best;
        }
        x[i] += 1;
    }
}

fn c6_solver_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = Instant::now();
    for case in 0..200 {
        let n = rng.gen_range(1..=4);
        let ub: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=5)).collect();
        let obj: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=15) as f64).collect();
        let rows: Vec<(Vec<f64>, f64)> = (0..rng.gen_range(0..=6))
            .map(|_| {
                let r = (0..n).map(|_| rng.gen_range(-1..=4) as f64).collect();
                (r, rng.gen_range(0..=12) as f64)
            })
            .collect();
        let mut prog = IntegerProgram::new(obj.clone()).with_upper_bounds(ub.clone());
        for (r, b) in &rows {
            prog = prog.leq(r.clone(), *b);
        }
        let sol = solve(&prog).map_err(|e| e.to_string())?;
        let want = brute_max(&obj, &ub, &rows);
        let got = sol.is_optimal().then_some(sol.objective_value);
        ensure(got == want, || format!("case {case}: {got:?} vs {want:?}"))?;
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("200/200 equal to enumeration, {secs:.3} s < 10 s"))
}

fn two_edge_junction(theta: f64, targets: (u32, u32)) -> FiberGraph {
    let vs = vec![
        Vertex { id: 0, position: Point2::ZERO },
        Vertex { id: 1, position: Point2::new(300.0, 0.0) },
        Vertex { id: 2, position: Point2::from_angle(theta) * 300.0 },
    ];
    let es = vec![
        Edge { id: 0, v1: 0, v2: 1, target: targets.0 },
        Edge { id: 1, v1: 0, v2: 2, target: targets.1 },
    ];
    FiberGraph::new(vs, es, &BTreeMap::new()).unwrap()
}

fn c7_curvature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut worst_t = 0.0f64;
    for _ in 0..50 {
        let theta = rng.gen_range(20.0f64..170.0).to_radians();
        let g = two_edge_junction(theta, (rng.gen_range(1..=4), rng.gen_range(1..=4)));
        let j = parameterize_junction(&g, 0, 2.0, 10.0).map_err(|e| e.to_string())?;
        for r in j.wedge_radii().into_iter().flatten() {
            lo = lo.min(r);
            hi = hi.max(r);
        }
        // symmetric quadratic: curvature peaks at the middle
        let q = QuadBezier::new(Point2::new(1.0, 0.0), Point2::ZERO, Point2::from_angle(theta));
        worst_t = worst_t.max((q.max_curvature().0 - 0.5).abs());
    }
    ensure(lo >= 10.0 && hi <= 10.01, || format!("radii in [{lo}, {hi}]"))?;
    ensure(worst_t <= 1e-6, || format!("|t* - 0.5| = {worst_t:e}"))?;
    Ok(format!("radii in [{lo:.6}, {hi:.6}] within [10, 10.01]; |t*-0.5| <= {worst_t:.1e} <= 1e-6"))
}

fn c8_quadratic_vs_cubic() -> Outcome {
    let a = 45f64.to_radians();
    let q = scale_isosceles_for_radius(a, 10.0, CurveKind::Quadratic);
    let c = scale_isosceles_for_radius(a, 10.0, CurveKind::Cubic);
    ensure(q > c, || format!("quadratic leg {q} <= cubic leg {c}"))?;
    Ok(format!("45 deg legs: quadratic {q:.3} mm > cubic {c:.3} mm"))
}

fn c9_interlooping() -> Outcome {
    let t = Instant::now();
    let want = [5.0, 5.5, 6.0, 6.4, 6.9, 7.2];
    let mut got = Vec::new();
    for (k, w) in want.iter().enumerate() {
        let b = connector_length(2.0, 10.0, k).map_err(|e| e.to_string())?;
        ensure((b - w).abs() <= 0.1, || format!("{k} offsets: b = {b:.3}, want {w}"))?;
        got.push(format!("{b:.2}"));
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("b = [{}] within 0.1 mm, {secs:.3} s < 5 s", got.join(", ")))
}

fn nearest(p: Point2, line: &[Point2]) -> f64 {
    line.windows(2)
        .map(|s| {
            let d = s[1] - s[0];
            let t = ((p - s[0]).dot(d) / d.dot(d)).clamp(0.0, 1.0);
            p.distance(s[0] + d * t)
        })
        .fold(f64::INFINITY, f64::min)
}

fn c10_offsets() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let fw = 2.0;
    let mut worst = 0.0f64;
    for case in 0..20 {
        let theta = rng.gen_range(30.0f64..160.0).to_radians();
        let legs = (rng.gen_range(25.0..60.0), rng.gen_range(25.0..60.0));
        let u = Point2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let v = u + Point2::new(legs.0, 0.0);
        let w = u + Point2::from_angle(theta) * legs.1;
        let reference = turn_curve(v, u, w).map_err(|e| e.to_string())?;
        let dense = reference.sample(4000);
        let k = rng.gen_range(1..=3) as f64 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let off = offset_curve(&reference, k * fw, 64, 0).map_err(|e| format!("case {case}: {e}"))?;
        for &p in &off.points {
            let rel = (nearest(p, &dense) - k.abs() * fw).abs() / (k.abs() * fw);
            worst = worst.max(rel);
        }
    }
    ensure(worst <= 0.01, || format!("worst relative error {worst:.4}"))?;
    Ok(format!("20 bows, worst relative distance error {worst:.1e} <= 1%"))
}

fn c11_cantilever() -> Outcome {
    let t = Instant::now();
    let p = common::fixture("cantilever");
    let h = solve_all_layers(&p.graph, &p.params).map_err(|e| e.to_string())?;
    let planner = Planner::new(&p.graph, p.plan).map_err(|e| e.to_string())?;
    let mut freq: BTreeMap<(usize, Vec<u64>), usize> = BTreeMap::new();
    let mut dirty = Vec::new();
    for l in &h.layers {
        *freq.entry((l.sheet, l.x.clone())).or_default() += 1;
        let (plan, _) = planner.plan_solution(l).map_err(|e| format!("layer {}: {e}", l.layer))?;
        let report = check_plan(&plan, 10.0, p.plan.fiber_width);
        if !report.is_clean() {
            dirty.push(l.layer);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let mut counts: Vec<usize> = freq.values().copied().collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let top3: usize = counts.iter().take(3).sum();
    let share = top3 as f64 / h.layers.len() as f64;
    ensure(h.layers.len() == 100, || format!("{} layers", h.layers.len()))?;
    ensure(counts.len() <= 6, || format!("{} distinct patterns", counts.len()))?;
    ensure(share > 0.5, || format!("top-3 share {share:.2}"))?;
    ensure(dirty.is_empty(), || format!("layers with violations: {dirty:?}"))?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{} patterns <= 6, top-3 share {:.0}% > 50%, 100/100 layers clean, {secs:.2} s < 60 s",
        counts.len(),
        share * 100.0
    ))
}

/// Every output of the pipeline for one fixture, concatenated.
fn pipeline_bytes(name: &str) -> Result<Vec<u8>, String> {
    let p = common::fixture(name);
    let h = solve_all_layers(&p.graph, &p.params).map_err(|e| e.to_string())?;
    let planner = Planner::new(&p.graph, p.plan).map_err(|e| e.to_string())?;
    let mut out = derive_report(&p.graph);
    out += &pattern_table(&h, &p.graph);
    out += &serde_json::to_string(&PatternRecord::new(&p.name, p.params.p, &h, &p.graph)).unwrap();
    let mut plans = Vec::new();
    for l in &h.layers {
        let (plan, _) = planner.plan_solution(l).map_err(|e| e.to_string())?;
        out += &render_svg(&plan, &p.graph, p.plan.fiber_width, true);
        plans.push(plan);
    }
    out += &path_export(&plans);
    Ok(out.into_bytes())
}

fn c12_determinism() -> Outcome {
    let mut total = 0;
    for name in ["minimal", "two_sheets", "cantilever"] {
        let a = pipeline_bytes(name)?;
        let b = pipeline_bytes(name)?;
        ensure(a == b, || format!("{name}: outputs differ"))?;
        total += a.len();
    }
    Ok(format!("3 fixtures, {total} bytes identical across two runs"))
}

fn main() -> ExitCode {
    let checks: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "connection derivation", c1_connections),
        (2, "usage matrices", c2_matrices),
        (3, "single-layer objectives", c3_objectives),
        (4, "six-layer sequence", c4_six_layers),
        (5, "connection report", c5_connection_report),
        (6, "solver vs enumeration", c6_solver_oracle),
        (7, "reference bow curvature", c7_curvature),
        (8, "quadratic vs cubic legs", c8_quadratic_vs_cubic),
        (9, "interlooping connector", c9_interlooping),
        (10, "offset parallelism", c10_offsets),
        (11, "cantilever end-to-end", c11_cantilever),
        (12, "determinism", c12_determinism),
    ];
    let mut failed = BTreeSet::new();
    for (n, name, check) in checks {
        match check() {
            Ok(detail) => println!("criterion {n:>2} PASS {name}: {detail}"),
            Err(detail) => {
                println!("criterion {n:>2} FAIL {name}: {detail}");
                failed.insert(n);
            }
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
