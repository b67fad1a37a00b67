use std::collections::HashMap;

use indexmap::IndexMap;
use proptest::prelude::*;

use xppkit::analysis::{argmin_abs, average_over_orbit, eig_order, trapz, Trajectory};
use xppkit::autorepo::{segment_branches, split_diagrams, ContinuationPoint, CLASS_TABLE};
use xppkit::export::{read_points, FreezeRow};
use xppkit::expr::{parse_expr, BinOp, Expr, Func};
use xppkit::numfmt::canonical_real;

fn point(branch_no: i64, class: usize, active: Vec<usize>, pars: Vec<f64>) -> ContinuationPoint {
    let (tpar, typ, _) = CLASS_TABLE[class];
    ContinuationPoint {
        branch_no,
        tpar,
        typ,
        lab: 0,
        tag: None,
        idx: 0,
        active,
        par_values: pars,
        l2: 0.0,
        period: None,
        vars: Vec::new(),
        eig_real: Vec::new(),
        eig_imag: Vec::new(),
    }
}

fn points() -> impl Strategy<Value = Vec<ContinuationPoint>> {
    prop::collection::vec((1i64..4, 0..CLASS_TABLE.len(), 1usize..20), 1..30).prop_map(|runs| {
        let mut out = Vec::new();
        for (b, c, n) in runs {
            for _ in 0..n {
                let mut p = point(b, c, vec![0], Vec::new());
                p.idx = out.len() + 1;
                out.push(p);
            }
        }
        out
    })
}

proptest! {
    #[test]
    fn segmentation_partitions(pts in points()) {
        let branches = segment_branches(&pts);
        let flat: Vec<&ContinuationPoint> = branches.iter().flat_map(|b| &b.points).collect();
        prop_assert_eq!(flat.len(), pts.len());
        for (a, b) in flat.iter().zip(&pts) {
            prop_assert_eq!(*a, b);
        }
        for w in branches.windows(2) {
            let (x, y) = (w[0].points.last().unwrap(), &w[1].points[0]);
            prop_assert!((x.tpar, x.typ, x.branch_no) != (y.tpar, y.typ, y.branch_no));
        }
        for b in &branches {
            let p0 = &b.points[0];
            prop_assert!(b.points.iter().all(|p| (p.tpar, p.typ, p.branch_no) == (p0.tpar, p0.typ, p0.branch_no)));
        }
    }

    #[test]
    fn diagram_spans_cover_points(
        spec in prop::collection::vec((0usize..3, 0u8..3, 1usize..10), 1..12)
    ) {
        let hot: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut pts = Vec::new();
        for (main, frozen, n) in spec {
            for k in 0..n {
                let mut pars = vec![f64::from(frozen); 3];
                pars[main] = k as f64;
                pts.push(point(1, 0, vec![main], pars));
            }
        }
        let spans = split_diagrams(&pts, &hot);
        prop_assert_eq!(spans[0].range.start, 0);
        prop_assert_eq!(spans.last().unwrap().range.end, pts.len());
        for w in spans.windows(2) {
            prop_assert_eq!(w[0].range.end, w[1].range.start);
        }
        for s in &spans {
            prop_assert!(!s.range.is_empty());
            let first = &pts[s.range.start];
            for p in &pts[s.range.clone()] {
                prop_assert_eq!(&p.active, &first.active);
            }
        }
    }

    #[test]
    fn eig_sort_is_idempotent(v in prop::collection::vec((-3i32..3, -3i32..3), 1..8)) {
        let re: Vec<f64> = v.iter().map(|x| f64::from(x.0) * 0.5).collect();
        let im: Vec<f64> = v.iter().map(|x| f64::from(x.1) * 0.5).collect();
        let o = eig_order(&re, &im);
        let (sr, si): (Vec<f64>, Vec<f64>) = o.iter().map(|&k| (re[k], im[k])).unzip();
        prop_assert_eq!(eig_order(&sr, &si), (0..re.len()).collect::<Vec<_>>());
        for w in 0..sr.len().saturating_sub(1) {
            prop_assert!(sr[w] < sr[w + 1] || (sr[w] == sr[w + 1] && si[w] >= si[w + 1]));
        }
    }

    #[test]
    fn average_is_linear(
        ys in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..60),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        period in 0.1f64..50.0,
    ) {
        let n = ys.len();
        let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut samples = IndexMap::new();
        samples.insert("x".to_string(), ys.iter().map(|p| p.0).collect::<Vec<_>>());
        samples.insert("y".to_string(), ys.iter().map(|p| p.1).collect::<Vec<_>>());
        let trj = Trajectory {
            name: "TRJ1".into(),
            source_label: "PT1_UZ".into(),
            t,
            samples,
            params: IndexMap::new(),
            period,
        };
        let mut env = HashMap::new();
        env.insert("a".to_string(), a);
        env.insert("b".to_string(), b);
        let avg = |e: &str| average_over_orbit(&trj, &parse_expr(e).unwrap(), &env).unwrap();
        let lhs = avg("a*x + b*y");
        let rhs = a * avg("x") + b * avg("y");
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        prop_assert!((avg("1") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trapz_of_a_line_is_exact(x0 in -5.0f64..5.0, steps in prop::collection::vec(0.01f64..1.0, 1..40), m in -3.0f64..3.0) {
        let mut x = vec![x0];
        for s in steps {
            x.push(x.last().unwrap() + s);
        }
        let y: Vec<f64> = x.iter().map(|v| m * v + 1.0).collect();
        let (a, b) = (x[0], *x.last().unwrap());
        let exact = 0.5 * m * (b * b - a * a) + (b - a);
        prop_assert!((trapz(&x, &y) - exact).abs() < 1e-9 * (1.0 + exact.abs()));
    }

    #[test]
    fn argmin_ignores_positive_scale(xs in prop::collection::vec(-100.0f64..100.0, 1..50), k in 1e-3f64..1e3) {
        let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
        let i = argmin_abs(&xs);
        let j = argmin_abs(&scaled);
        // scaling can only merge near-ties, and ties go to the earliest index
        prop_assert!(i == j || (xs[i].abs() - xs[j].abs()).abs() <= 1e-12 * xs[i].abs().max(1e-300));
    }

    #[test]
    fn canonical_real_reparses(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let s = canonical_real(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-10 * x.abs().max(f64::MIN_POSITIVE));
        prop_assert_eq!(canonical_real(back), s);
    }

    #[test]
    fn freeze_rows_reparse(rows in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>(), -9i32..10, 1usize..50), 0..20)) {
        let rows: Vec<FreezeRow> = rows
            .into_iter()
            .filter(|r| r.0.is_finite() && r.1.is_finite() && r.2.is_finite())
            .map(|(x, ylo, yhi, typ, branch)| FreezeRow { x, ylo, yhi, typ, branch })
            .collect();
        let text: String = rows.iter().map(|r| format!("{} {} {} {} {}\n", r.x, r.ylo, r.yhi, r.typ, r.branch)).collect();
        prop_assert_eq!(read_points(&text).unwrap(), rows);
    }

    #[test]
    fn expr_print_parse(e in expr()) {
        let text = e.to_string();
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        let env: HashMap<String, f64> =
            [("v", 0.3), ("n", -1.7), ("c", 2.0), ("gca", 4.0), ("x_1", 0.01), ("T", 12.5)]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect();
        let (a, b) = (e.eval(&env).unwrap(), back.eval(&env).unwrap());
        prop_assert!(a == b || (a.is_nan() && b.is_nan()), "{} vs {}", a, b);
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let names = prop::sample::select(vec!["v", "n", "c", "gca", "x_1", "T"]);
    let leaf = prop_oneof![
        (0.0f64..1e6).prop_map(Expr::Num),
        (-1e3f64..0.0).prop_map(Expr::Num),
        names.prop_map(|s| Expr::Var(s.to_string())),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        let ops = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]);
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (ops, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
            (prop::sample::select(Func::ALL.to_vec()), prop::collection::vec(inner, 2)).prop_map(|(f, mut args)| {
                args.truncate(f.arity());
                Expr::Call(f, args)
            }),
        ]
    })
}
