//! Writer for the canonical `.auto` layout.

use std::fmt::Write;

use super::lexer::PERIOD_SENTINEL;
use super::AutoRepo;
use crate::numfmt::canonical_real as r;

/// Serialize a repository back to `.auto` text.
///
/// Orbits dropped at load time (orphans, equilibrium targets, or a load with
/// trajectories disabled) are not written.
pub fn serialize_auto(repo: &AutoRepo) -> String {
    let mut out = String::new();
    let s = &repo.settings;
    out.push_str("[settings]\n");
    let _ = writeln!(out, "NPTS {}", s.npts);
    for (k, v) in &s.num {
        let _ = writeln!(out, "{} {}", k, r(*v));
    }
    for uz in &s.uz {
        let _ = writeln!(out, "UZ {} {} {}", uz.index, uz.parameter, r(uz.value));
    }
    out.push_str("[hot]\n");
    out.push_str(&repo.hot.join(" "));
    out.push_str("\n[points]\n");
    for d in &repo.diagrams {
        for b in &d.branches {
            for p in &b.points {
                let icp1 = p.active[0] + 1;
                let icp2 = p.active.get(1).map_or(0, |i| i + 1);
                let tag = p.tag.map_or("-", |t| t.name());
                let _ =
                    write!(out, "{} {} {} {} {} {} {} {}", p.branch_no, p.tpar, p.typ, p.lab, tag, p.idx, icp1, icp2);
                let mut reals: Vec<f64> = p.par_values.clone();
                reals.push(p.l2);
                reals.push(p.period.unwrap_or(PERIOD_SENTINEL));
                for v in &p.vars {
                    reals.extend([v.initial, v.upper, v.lower, v.average]);
                }
                reals.extend(&p.eig_real);
                reals.extend(&p.eig_imag);
                for x in reals {
                    out.push(' ');
                    out.push_str(&r(x));
                }
                out.push('\n');
            }
        }
    }
    out.push_str("[solutions]\n");
    for d in &repo.diagrams {
        for lp in d.labeled() {
            let Some(orbit) = &lp.orbit else { continue };
            let _ = writeln!(out, "{} {}", lp.lab, orbit.t.len());
            for (k, t) in orbit.t.iter().enumerate() {
                out.push_str(&r(*t));
                for col in orbit.samples.values() {
                    out.push(' ');
                    out.push_str(&r(col[k]));
                }
                out.push('\n');
            }
        }
    }
    out
}
