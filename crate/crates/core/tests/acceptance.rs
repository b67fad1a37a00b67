//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines are printed on success too.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use indexmap::IndexMap;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use xppkit::analysis::{
    average_over_orbit, build_manifold, find_zero_average, get_eig, get_trj, slow_manifold_projection, Trajectory,
};
use xppkit::autorepo::{
    classify, parse_auto, segment_branches, serialize_auto, AutoRepo, BifurcationDiagram, BranchClass,
    ContinuationPoint, LabelTag, LoadOptions, VarSummary, CLASS_TABLE,
};
use xppkit::export::{
    emit_diagram_plot, emit_eig_plot, emit_labeled_points_plot, freeze_rows, from_json, read_points, to_json,
    write_points, DumpTarget, PeriodicBranchMode, PlotStyle,
};
use xppkit::expr::parse_expr;
use xppkit::model::{parse_model, Model};

type Outcome = Result<String, String>;
/// `(ode, auto, integrand, extra bindings)`
type AvgCase<'a> = (&'a str, &'a str, &'a str, &'a [(&'a str, f64)]);
type Check = (&'static str, &'static str, fn() -> Outcome);

const FIXTURES: [(&str, &str); 5] = [
    ("hh.ode", "hh_1p.auto"),
    ("hh.ode", "hh_1p2p.auto"),
    ("hh.ode", "hh_multi.auto"),
    ("fhn.ode", "fhn.auto"),
    ("ck.ode", "ck.auto"),
];

const CK_INTEGRAND: &str = "-(alpha*(gca*0.5*(1+tanh((v-vm)/sm))*(v-vca)) + kpmca*c)";
const KPMCA: f64 = 0.32;

fn fixture(name: &str) -> Result<String, String> {
    let path = format!("{}/tests/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    fs::read_to_string(&path).map_err(|e| format!("{}: {}", path, e))
}

fn load(ode: &str, auto: &str) -> Result<(Model, AutoRepo, String), String> {
    let model = parse_model(&fixture(ode)?).map_err(|e| format!("{}: {}", ode, e))?;
    let src = fixture(auto)?;
    let (repo, report) = parse_auto(&model, &src, LoadOptions::default()).map_err(|e| format!("{}: {}", auto, e))?;
    if !report.warnings.is_empty() {
        return Err(format!("{}: unexpected warnings {:?}", auto, report.warnings));
    }
    Ok((model, repo, src))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Model parameters that are not hot, which is what the command line offers
/// an integrand.
fn model_env(model: &Model, bd: &BifurcationDiagram) -> HashMap<String, f64> {
    model.parameters.iter().filter(|(k, _)| bd.hot_index(k).is_none()).map(|(k, v)| (k.clone(), *v)).collect()
}

fn ac1() -> Outcome {
    let t0 = Instant::now();
    let expected = [
        (0, 1, "SEQ"),
        (0, 2, "UEQ"),
        (0, 3, "SLC"),
        (0, 4, "ULC"),
        (0, 8, "BVP"),
        (9, 9, "UZ"),
        (1, 1, "SN"),
        (2, 2, "SNPO"),
        (3, 3, "HB"),
        (4, 4, "TR"),
        (5, 5, "BP"),
        (6, 6, "PD"),
    ];
    ensure(CLASS_TABLE.len() == 12, || "class table size".into())?;
    let mut accepted = 0;
    for tpar in -5..=20 {
        for typ in -5..=20 {
            let want = expected.iter().find(|(p, t, _)| *p == tpar && *t == typ).map(|e| e.2);
            match (classify(tpar, typ), want) {
                (Ok(c), Some(name)) if c.name() == name => accepted += 1,
                (Err(_), None) => {}
                (got, want) => return Err(format!("({}, {}): got {:?}, want {:?}", tpar, typ, got, want)),
            }
        }
    }
    ensure(accepted == 12, || format!("{} pairs accepted", accepted))?;
    let names: Vec<&str> = BranchClass::ALL.iter().map(|c| c.name()).collect();
    ensure(names.len() == 12 && expected.iter().all(|e| names.contains(&e.2)), || "class names".into())?;
    let tags = ["HB", "SN", "PD", "SNPO", "TR", "EP", "UZ"];
    ensure(LabelTag::ALL.len() == 7, || "tag count".into())?;
    for name in tags {
        let t: LabelTag = name.parse()?;
        ensure(t.name() == name && t.to_string() == name, || format!("tag {}", name))?;
    }
    for bad in ["BP", "hb", "", "LP", "ZZ"] {
        ensure(bad.parse::<LabelTag>().is_err(), || format!("`{}` accepted as a tag", bad))?;
    }
    let dt = t0.elapsed().as_secs_f64();
    ensure(dt < 1.0, || format!("took {:.3} s", dt))?;
    Ok(format!("12/12 class pairs over 26x26 codes, 7/7 tags, {:.3} s", dt))
}

fn ac2() -> Outcome {
    let round4 = |x: f64| (x * 1e4).round() / 1e4;
    let (_, repo, _) = load("hh.ode", "hh_1p.auto")?;
    let summary = repo.summary_lines();
    ensure(summary == ["1P-BD - Name: BD1_i0 - Main: i0"], || format!("summary {:?}", summary))?;
    let eig = get_eig(&repo.diagrams[0], true);
    let re: Vec<f64> = (0..4).map(|k| round4(eig.per_branch[1][[4, k, 0]])).collect();
    ensure(re == [0.0095, 0.7579, 0.7579, 0.8861], || format!("branch 2 point 5 real parts {:?}", re))?;
    let im: Vec<f64> = (0..5).map(|k| round4(eig.per_label[[2, k, 1]])).collect();
    ensure(im == [3.0, 0.0, 0.8738, -0.8738, 0.0], || format!("label 3 imaginary slice {:?}", im))?;
    let (_, ck, _) = load("ck.ode", "ck.auto")?;
    let bd = ck.diagram(None).ok_or("ck: no diagram")?;
    let n = get_trj(bd).map_err(|e| e.to_string())?.len();
    ensure(n == 366, || format!("ck nTRJ = {}", n))?;
    Ok(format!("summary, eigen tables exact to 4 decimals, ck nTRJ = {}", n))
}

fn point(branch_no: i64, tpar: i32, typ: i32, idx: usize) -> ContinuationPoint {
    ContinuationPoint {
        branch_no,
        tpar,
        typ,
        lab: 0,
        tag: None,
        idx,
        active: vec![0],
        par_values: Vec::new(),
        l2: 0.0,
        period: None,
        vars: Vec::<VarSummary>::new(),
        eig_real: Vec::new(),
        eig_imag: Vec::new(),
    }
}

fn ac3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5e9);
    let mut spent = 0.0;
    let mut total = 0usize;
    for case in 0..1000 {
        let len = rng.gen_range(1..=10_000usize);
        let mut pts = Vec::with_capacity(len);
        while pts.len() < len {
            let (tpar, typ, _) = CLASS_TABLE[rng.gen_range(0..CLASS_TABLE.len())];
            let b = rng.gen_range(1..=3);
            let run = rng.gen_range(1..=200usize).min(len - pts.len());
            for _ in 0..run {
                let k = pts.len();
                pts.push(point(b, tpar, typ, k + 1));
            }
        }
        total += len;
        let t0 = Instant::now();
        // run-length encoding of (tpar, typ, branch_no)
        let mut runs: Vec<(i32, i32, i64, usize, usize)> = Vec::new();
        for (k, p) in pts.iter().enumerate() {
            match runs.last_mut() {
                Some(r) if (r.0, r.1, r.2) == (p.tpar, p.typ, p.branch_no) => r.4 += 1,
                _ => runs.push((p.tpar, p.typ, p.branch_no, k, 1)),
            }
        }
        let got = segment_branches(&pts);
        ensure(got.len() == runs.len(), || format!("case {}: {} branches, oracle {}", case, got.len(), runs.len()))?;
        for (k, (b, r)) in got.iter().zip(&runs).enumerate() {
            let class = classify(r.0, r.1).map_err(|e| e.to_string())?;
            let ok = b.index == k + 1
                && b.class == class
                && b.name == format!("B{}_{}", k + 1, class)
                && b.points.len() == r.4
                && b.points[0].idx == r.3 + 1
                && b.points.iter().all(|p| p.branch_no == r.2);
            ensure(ok, || format!("case {}: branch {} differs from the oracle", case, k + 1))?;
        }
        spent += t0.elapsed().as_secs_f64();
    }
    let dt = spent;
    ensure(dt < 5.0, || format!("took {:.2} s", dt))?;
    Ok(format!("1000/1000 sequences ({} points) agree, {:.2} s segmenting and checking", total, dt))
}

fn synthetic(n: usize, f: impl Fn(f64) -> f64, period: f64) -> Trajectory {
    let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let x = t.iter().map(|&s| f(s)).collect();
    Trajectory {
        name: "TRJ1".into(),
        source_label: "PT1_UZ".into(),
        t,
        samples: [("x".to_string(), x)].into_iter().collect(),
        params: IndexMap::new(),
        period,
    }
}

fn ac4() -> Outcome {
    let env: HashMap<String, f64> = HashMap::new();
    let avg = |trj: &Trajectory, e: &str| -> Result<f64, String> {
        average_over_orbit(trj, &parse_expr(e).map_err(|e| e.to_string())?, &env).map_err(|e| e.to_string())
    };
    // closed forms on N = 1000
    let sin_err = (avg(&synthetic(1000, |s| (2.0 * PI * s).sin(), 3.7), "x + 2")? - 2.0).abs();
    let half_err = (avg(&synthetic(1000, |s| s.sin(), 1.0), "x")? - (1.0 - 1f64.cos())).abs();
    let const_err = (avg(&synthetic(1000, |_| 0.25, 12.0), "4*x")? - 1.0).abs();
    let worst = sin_err.max(half_err).max(const_err);
    ensure(worst <= 1e-6, || format!("closed-form error {:e}", worst))?;

    // second-order convergence on a non-periodic integrand
    let exact = 1f64.exp() - 1.0;
    let errs: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|&n| avg(&synthetic(n + 1, f64::exp, 2.0), "x").map(|j| (j - exact).abs()))
        .collect::<Result<_, _>>()?;
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    for r in ratios {
        ensure((80.0..=120.0).contains(&r), || format!("convergence ratio {:.2}, errors {:?}", r, errs))?;
    }

    // the calcium integrand against a fine midpoint sum of its piecewise-linear interpolant
    let (model, repo, _) = load("ck.ode", "ck.auto")?;
    let bd = repo.diagram(None).ok_or("ck: no diagram")?;
    let trj = get_trj(bd).map_err(|e| e.to_string())?;
    let mut env = model_env(&model, bd);
    env.insert("kpmca".into(), KPMCA);
    let e = parse_expr(CK_INTEGRAND).map_err(|e| e.to_string())?;
    let p = |k: &str| model.parameter(k).ok_or(format!("ck.ode lacks `{}`", k));
    let (alpha, gca, vm, sm, vca) = (p("alpha")?, p("gca")?, p("vm")?, p("sm")?, p("vca")?);
    let m = 1_000_000usize;
    let mut worst_rel = 0.0f64;
    let mut worst_orbit = 0.0f64;
    for t in &trj {
        let c = t.params["c"];
        let f = |v: f64| -(alpha * (gca * 0.5 * (1.0 + ((v - vm) / sm).tanh()) * (v - vca)) + KPMCA * c);
        let v = &t.samples["v"];
        let fi: Vec<f64> = v.iter().map(|&x| f(x)).collect();
        let interp = |ys: &[f64], s: f64| {
            let k = t.t.partition_point(|&x| x <= s).clamp(1, t.t.len() - 1);
            let w = (s - t.t[k - 1]) / (t.t[k] - t.t[k - 1]);
            ys[k - 1] + w * (ys[k] - ys[k - 1])
        };
        let mut oracle = 0.0;
        let mut from_orbit = 0.0;
        for i in 0..m {
            let s = (i as f64 + 0.5) / m as f64;
            oracle += interp(&fi, s);
            from_orbit += f(interp(v, s));
        }
        oracle /= m as f64;
        from_orbit /= m as f64;
        let j = average_over_orbit(t, &e, &env).map_err(|e| e.to_string())?;
        worst_rel = worst_rel.max((j - oracle).abs() / oracle.abs());
        // J crosses zero along the family, so scale this one by the integrand size
        let scale = fi.iter().map(|x| x.abs()).sum::<f64>() / fi.len() as f64;
        worst_orbit = worst_orbit.max((j - from_orbit).abs() / scale);
    }
    ensure(worst_rel <= 1e-6, || format!("ck relative error {:e}", worst_rel))?;
    Ok(format!(
        "closed forms {:.1e}, ratios {:.1}/{:.1}, ck {} orbits rel {:.1e} (orbit-interpolated oracle {:.1e} of mean |f|)",
        worst, ratios[0], ratios[1], trj.len(), worst_rel, worst_orbit
    ))
}

fn ac5() -> Outcome {
    let mut checked = 0;
    for (ode, auto) in FIXTURES {
        let (_, repo, _) = load(ode, auto)?;
        for bd in &repo.diagrams {
            let Ok(trj) = get_trj(bd) else { continue };
            let vars: Vec<&str> = trj[0].samples.keys().map(String::as_str).collect();
            let pars: Vec<&str> = trj[0].params.keys().map(String::as_str).collect();
            let s = build_manifold(&trj, &vars, &pars).map_err(|e| e.to_string())?;
            for v in &vars {
                let mat = &s.matrices[*v];
                for (j, t) in trj.iter().enumerate() {
                    let col: Vec<u64> = mat.column(j).iter().map(|x| x.to_bits()).collect();
                    let want: Vec<u64> = t.samples[*v].iter().map(|x| x.to_bits()).collect();
                    ensure(col == want, || format!("{} {}: column {} of {} differs", auto, bd.name, j, v))?;
                }
            }
            for p in &pars {
                let mat = &s.matrices[*p];
                for (j, t) in trj.iter().enumerate() {
                    ensure(mat.column(j).iter().all(|x| x.to_bits() == t.params[*p].to_bits()), || {
                        format!("{} {}: column {} of {} differs", auto, bd.name, j, p)
                    })?;
                }
            }
            let proj = slow_manifold_projection(&trj, &vars).map_err(|e| e.to_string())?;
            for v in &vars {
                let mat = &s.matrices[*v];
                let last: Vec<u64> = mat.row(mat.nrows() - 1).iter().map(|x| x.to_bits()).collect();
                let got: Vec<u64> = proj[*v].iter().map(|x| x.to_bits()).collect();
                ensure(last == got, || format!("{} {}: projection of {} differs", auto, bd.name, v))?;
            }
            checked += trj.len();
        }
    }
    Ok(format!("{} trajectories bit-exact across all fixtures", checked))
}

fn ac6() -> Outcome {
    let mut freezes = 0;
    for (ode, auto) in FIXTURES {
        let (model, repo, src) = load(ode, auto)?;
        ensure(serialize_auto(&repo) == src, || format!("{} is not byte-identical", auto))?;
        let back: AutoRepo = from_json(&to_json(DumpTarget::Repo(&repo))).map_err(|e| e.to_string())?;
        ensure(back == repo, || format!("{}: JSON round-trip differs", auto))?;
        for bd in repo.diagrams.iter().filter(|d| !d.is_two_parameter()) {
            let rows = freeze_rows(&model, bd, None).map_err(|e| e.to_string())?;
            let text = write_points(&model, bd, None).map_err(|e| e.to_string())?;
            let reread = read_points(&text).map_err(|e| e.to_string())?;
            ensure(rows == reread, || format!("{} {}: freeze rows differ", auto, bd.name))?;
            freezes += 1;
        }
    }
    Ok(format!("{} .auto files byte-identical, JSON equal, {} freeze files equal", FIXTURES.len(), freezes))
}

fn diagram_svg(model: &Model, bd: &BifurcationDiagram, filter: Option<&[usize]>) -> Result<String, String> {
    let style = PlotStyle::default();
    let mode = PeriodicBranchMode::Standard;
    let mut p = emit_diagram_plot(model, bd, None, mode, &style, filter).map_err(|e| e.to_string())?;
    let marks = emit_labeled_points_plot(model, bd, None, mode, &style, filter, None).map_err(|e| e.to_string())?;
    p.overlay(marks);
    Ok(p.to_svg(&style))
}

/// Attribute values of every element whose class is exactly `class`.
fn attr_of(svg: &str, class: &str, attr: &str) -> Vec<String> {
    let tag = format!("class=\"{}\"", class);
    let key = format!(" {}=\"", attr);
    svg.lines()
        .filter(|l| l.contains(&tag))
        .filter_map(|l| l.split_once(&key).and_then(|(_, r)| r.split_once('"')).map(|(v, _)| v.to_string()))
        .collect()
}

fn ac7() -> Outcome {
    let (model, repo, _) = load("hh.ode", "hh_1p.auto")?;
    let bd = &repo.diagrams[0];
    let a = diagram_svg(&model, bd, None)?;
    let b = diagram_svg(&load("hh.ode", "hh_1p.auto")?.0, &load("hh.ode", "hh_1p.auto")?.1.diagrams[0], None)?;
    ensure(a == b, || "two renders differ".into())?;

    let (ck_model, ck, _) = load("ck.ode", "ck.auto")?;
    let c = diagram_svg(&ck_model, ck.diagram(None).ok_or("ck: no diagram")?, None)?;
    let strokes = [("SEQ", "#ff0000"), ("UEQ", "#000000"), ("SLC", "#009900"), ("ULC", "#0000ff")];
    for (class, hex) in strokes {
        let got = attr_of(&a, &format!("branch {}", class), "stroke");
        ensure(!got.is_empty() && got.iter().all(|s| s == hex), || format!("{} strokes {:?}", class, got))?;
    }
    let markers = [(&a, "HB", "rect", "#ff00ff"), (&a, "SNPO", "circle", "#ff8000"), (&c, "SN", "circle", "#00bfbf")];
    for (svg, tag, shape, hex) in markers {
        let class = format!("marker {}", tag);
        let lines: Vec<&str> = svg.lines().filter(|l| l.contains(&format!("class=\"{}\"", class))).collect();
        ensure(!lines.is_empty(), || format!("no {} markers", tag))?;
        ensure(lines.iter().all(|l| l.starts_with(&format!("<{} ", shape))), || format!("{} is not a {}", tag, shape))?;
        let fills = attr_of(svg, &class, "fill");
        ensure(fills.iter().all(|f| f == hex), || format!("{} fills {:?}", tag, fills))?;
    }

    // branch_filter {1,2,4} on the eigenvalue cylinder
    let style = PlotStyle::default();
    let axes = ["i0", "EigR", "EigI"];
    let eig = |f: Option<&[usize]>| {
        emit_eig_plot(&model, bd, &axes, &style, f).map(|p| p.to_svg(&style)).map_err(|e| e.to_string())
    };
    let all = eig(None)?;
    let kept = eig(Some(&[1, 2, 4]))?;
    let third = "data-branch=\"3\"";
    let own_labels = bd.labeled().iter().filter(|lp| lp.branch == 3).count();
    ensure(all.contains(third) && own_labels > 0, || "branch 3 has no locus or labeled points to remove".into())?;
    ensure(!kept.contains(third), || "branch 3 still drawn".into())?;
    for k in [1, 2, 4] {
        let tag = format!("data-branch=\"{}\"", k);
        ensure(kept.contains(&tag), || format!("branch {} missing", k))?;
    }
    let d = diagram_svg(&model, bd, Some(&[1, 2, 4]))?;
    ensure(!d.contains(third), || "branch 3 still in the diagram plot".into())?;
    Ok(format!(
        "byte-identical renders, 4 stroke and 3 marker styles, filter drops branch 3 and its {} labels",
        own_labels
    ))
}

fn ac8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut runs = 0;
    let cases: [AvgCase; 3] = [
        ("ck.ode", "ck.auto", CK_INTEGRAND, &[("kpmca", KPMCA)]),
        ("fhn.ode", "fhn.auto", "h - 0.5*(v^3 - v + 1)", &[]),
        ("hh.ode", "hh_1p.auto", "v + 60", &[]),
    ];
    for (ode, auto, integrand, extra) in cases {
        let (model, repo, _) = load(ode, auto)?;
        let bd = repo.diagrams.iter().rev().find(|d| get_trj(d).is_ok()).ok_or("no orbits")?;
        let trj = get_trj(bd).map_err(|e| e.to_string())?;
        let mut env = model_env(&model, bd);
        env.extend(extra.iter().map(|(k, v)| (k.to_string(), *v)));
        let base =
            find_zero_average(&trj, &parse_expr(integrand).unwrap(), &env, &bd.params[0]).map_err(|e| e.to_string())?;
        let scaled = parse_expr(&format!("kscale*({})", integrand)).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let k = 10f64.powf(rng.gen_range(-3.0..3.0));
            env.insert("kscale".into(), k);
            let z = find_zero_average(&trj, &scaled, &env, &bd.params[0]).map_err(|e| e.to_string())?;
            ensure(z.index == base.index, || {
                format!("{}: scale {} moved the argmin {} -> {}", auto, k, base.index, z.index)
            })?;
            runs += 1;
        }
    }
    Ok(format!("{}/{} scalings keep the argmin", runs, runs))
}

fn main() -> ExitCode {
    let checks: [Check; 8] = [
        ("AC1", "type tables", ac1),
        ("AC2", "golden fixtures", ac2),
        ("AC3", "segmentation oracle", ac3),
        ("AC4", "orbit averaging", ac4),
        ("AC5", "manifold losslessness", ac5),
        ("AC6", "round-trips", ac6),
        ("AC7", "svg determinism and legend", ac7),
        ("AC8", "argmin scaling invariance", ac8),
    ];
    let mut failed = 0;
    for (id, what, f) in checks {
        match f() {
            Ok(detail) => println!("{} PASS {}: {}", id, what, detail),
            Err(why) => {
                failed += 1;
                println!("{} FAIL {}: {}", id, what, why);
            }
        }
    }
    if failed > 0 {
        println!("{} of 8 acceptance criteria failed", failed);
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
