//! Tokenizer for the canonical `.auto` layout.
//!
//! Sections, in order: `[settings]`, `[hot]`, `[points]`, `[solutions]`.
//! Blank lines and `#` comments are ignored everywhere. All error offsets are
//! byte offsets into the source.

use std::collections::HashSet;

use indexmap::IndexMap;

use super::{
    classify, AutoError, ContinuationPoint, ContinuationSettings, LabelTag, UzCondition, VarSummary, NUM_KEYS,
};

/// Value written in the period column of equilibrium points.
pub const PERIOD_SENTINEL: f64 = -1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub lab: u32,
    pub offset: usize,
    pub t: Vec<f64>,
    /// One column per dynamical variable.
    pub columns: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RawAuto {
    pub settings: ContinuationSettings,
    pub hot: Vec<String>,
    pub points: Vec<ContinuationPoint>,
    pub solutions: Vec<SolutionRecord>,
}

#[derive(Debug, Clone, Copy)]
struct Line<'a> {
    text: &'a str,
    offset: usize,
}

impl<'a> Line<'a> {
    fn tokens(&self) -> Vec<(&'a str, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in self.text.char_indices() {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push((&self.text[s..i], self.offset + s));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            out.push((&self.text[s..], self.offset + s));
        }
        out
    }
}

fn content_lines(source: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for raw in source.split_inclusive('\n') {
        let text = raw.trim_end_matches(['\n', '\r']);
        let trimmed = text.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            out.push(Line { text, offset });
        }
        offset += raw.len();
    }
    out
}

const SECTIONS: [&str; 4] = ["settings", "hot", "points", "solutions"];

fn header(line: &Line) -> Option<&'static str> {
    let t = line.text.trim();
    let name = t.strip_prefix('[')?.strip_suffix(']')?;
    SECTIONS.iter().copied().find(|s| *s == name)
}

pub fn lex(source: &str, n_dyn: usize) -> Result<RawAuto, AutoError> {
    let lines = content_lines(source);
    let mut starts = Vec::new();
    let mut expect = 0;
    for (k, line) in lines.iter().enumerate() {
        if let Some(name) = header(line) {
            if expect >= SECTIONS.len() || name != SECTIONS[expect] {
                return Err(AutoError::SectionMissing(SECTIONS[expect.min(SECTIONS.len() - 1)]));
            }
            starts.push(k);
            expect += 1;
        } else if starts.is_empty() {
            return Err(AutoError::SectionMissing("settings"));
        }
    }
    if expect < SECTIONS.len() {
        return Err(AutoError::SectionMissing(SECTIONS[expect]));
    }
    let body = |s: usize| {
        let end = starts.get(s + 1).copied().unwrap_or(lines.len());
        &lines[starts[s] + 1..end]
    };
    let settings = lex_settings(body(0))?;
    let hot = lex_hot(body(1), lines[starts[1]].offset)?;
    let points = body(2).iter().map(|l| lex_point(l, hot.len(), n_dyn)).collect::<Result<Vec<_>, _>>()?;
    if points.len() != settings.npts {
        return Err(AutoError::PointCountMismatch { declared: settings.npts, found: points.len() });
    }
    let mut labels = HashSet::new();
    for p in points.iter().filter(|p| p.lab > 0) {
        if !labels.insert(p.lab) {
            return Err(AutoError::DuplicateLabel(p.lab));
        }
    }
    let solutions = lex_solutions(body(3), n_dyn)?;
    Ok(RawAuto { settings, hot, points, solutions })
}

fn real(tok: &str, offset: usize, what: &str) -> Result<f64, AutoError> {
    tok.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| AutoError::PointRecordMalformed {
        offset,
        msg: format!("{} `{}` is not a finite real", what, tok),
    })
}

fn lex_settings(lines: &[Line]) -> Result<ContinuationSettings, AutoError> {
    let mut npts = None;
    let mut num = IndexMap::new();
    let mut uz: Vec<UzCondition> = Vec::new();
    for line in lines {
        let toks = line.tokens();
        let bad = |msg: String| AutoError::SettingsMalformed { offset: line.offset, msg };
        let key = toks[0].0;
        if key == "NPTS" {
            if toks.len() != 2 {
                return Err(bad("NPTS takes one integer".into()));
            }
            npts = Some(toks[1].0.parse::<usize>().map_err(|_| bad("NPTS must be a non-negative integer".into()))?);
        } else if key == "UZ" {
            if toks.len() != 4 {
                return Err(bad("UZ takes an index, a parameter and a value".into()));
            }
            let index: u8 = toks[1]
                .0
                .parse()
                .ok()
                .filter(|i| (1..=9).contains(i))
                .ok_or_else(|| bad("UZ index must be 1..9".into()))?;
            if uz.iter().any(|u| u.index == index) {
                return Err(bad(format!("UZ index {} repeated", index)));
            }
            let value = toks[3].0.parse::<f64>().map_err(|_| bad(format!("`{}` is not a real", toks[3].0)))?;
            uz.push(UzCondition { index, parameter: toks[2].0.to_string(), value });
        } else if NUM_KEYS.contains(&key) {
            if toks.len() != 2 {
                return Err(bad(format!("{} takes one value", key)));
            }
            if num.contains_key(key) {
                return Err(bad(format!("{} repeated", key)));
            }
            let v = toks[1].0.parse::<f64>().map_err(|_| bad(format!("`{}` is not a real", toks[1].0)))?;
            num.insert(key.to_string(), v);
        } else {
            return Err(bad(format!("unknown setting `{}`", key)));
        }
    }
    let npts = npts.ok_or(AutoError::SectionMissing("settings"))?;
    Ok(ContinuationSettings { npts, num, uz })
}

fn lex_hot(lines: &[Line], offset: usize) -> Result<Vec<String>, AutoError> {
    let bad = |msg: &str| AutoError::SettingsMalformed { offset, msg: msg.to_string() };
    if lines.len() != 1 {
        return Err(bad("[hot] holds exactly one line of names"));
    }
    let names: Vec<String> = lines[0].tokens().iter().map(|t| t.0.to_string()).collect();
    if names.is_empty() || names.len() > 8 {
        return Err(bad("between 1 and 8 hot parameters are allowed"));
    }
    let unique: HashSet<&String> = names.iter().collect();
    if unique.len() != names.len() {
        return Err(bad("hot parameter listed twice"));
    }
    Ok(names)
}

fn lex_point(line: &Line, h: usize, n: usize) -> Result<ContinuationPoint, AutoError> {
    let toks = line.tokens();
    let fixed = 8 + h + 2;
    let expected = fixed + 6 * n;
    if toks.len() != expected {
        if toks.len() > fixed && (toks.len() - fixed).is_multiple_of(6) {
            return Err(AutoError::DimensionMismatch {
                offset: line.offset,
                expected: n,
                found: (toks.len() - fixed) / 6,
            });
        }
        return Err(AutoError::PointRecordMalformed {
            offset: line.offset,
            msg: format!("expected {} fields, found {}", expected, toks.len()),
        });
    }
    let bad = |k: usize, msg: String| AutoError::PointRecordMalformed { offset: toks[k].1, msg };
    let int = |k: usize, what: &str| -> Result<i64, AutoError> {
        toks[k].0.parse::<i64>().map_err(|_| bad(k, format!("{} `{}` is not an integer", what, toks[k].0)))
    };
    let branch_no = int(0, "branch number")?;
    let tpar = int(1, "tpar")? as i32;
    let typ = int(2, "typ")? as i32;
    let class = classify(tpar, typ)?;
    let lab = u32::try_from(int(3, "label")?).map_err(|_| bad(3, "label must be non-negative".into()))?;
    let tag = match toks[4].0 {
        "-" => None,
        s => Some(s.parse::<LabelTag>().map_err(|e| bad(4, e))?),
    };
    if (lab > 0) != tag.is_some() {
        return Err(bad(3, "a label number needs a label type and vice versa".into()));
    }
    let idx = usize::try_from(int(5, "index")?).map_err(|_| bad(5, "index must be positive".into()))?;
    let icp1 = int(6, "icp1")?;
    let icp2 = int(7, "icp2")?;
    if !(1..=h as i64).contains(&icp1) || !(0..=h as i64).contains(&icp2) || icp1 == icp2 {
        return Err(bad(6, format!("continuation parameters ({}, {}) do not index the hot list", icp1, icp2)));
    }
    let mut active = vec![icp1 as usize - 1];
    if icp2 > 0 {
        active.push(icp2 as usize - 1);
    }
    let one_par = matches!(tpar, 0 | 9);
    if one_par != (active.len() == 1) {
        return Err(bad(1, format!("tpar {} does not match {} continuation parameter(s)", tpar, active.len())));
    }
    let mut k = 8;
    let mut reals = |count: usize, what: &str| -> Result<Vec<f64>, AutoError> {
        let out = (k..k + count).map(|j| real(toks[j].0, toks[j].1, what)).collect();
        k += count;
        out
    };
    let par_values = reals(h, "parameter")?;
    let l2 = reals(1, "L2 norm")?[0];
    let period_raw = reals(1, "period")?[0];
    let period = if period_raw == PERIOD_SENTINEL {
        None
    } else if period_raw > 0.0 {
        Some(period_raw)
    } else {
        return Err(bad(8 + h + 1, format!("period {} is neither positive nor the sentinel", period_raw)));
    };
    let quad = reals(4 * n, "variable summary")?;
    let vars: Vec<VarSummary> =
        quad.chunks(4).map(|q| VarSummary { initial: q[0], upper: q[1], lower: q[2], average: q[3] }).collect();
    if class.is_periodic() {
        if period.is_none() {
            return Err(bad(8 + h + 1, format!("{} points need a period", class)));
        }
        for (j, v) in vars.iter().enumerate() {
            if !(v.lower <= v.average && v.average <= v.upper) {
                return Err(bad(fixed + 4 * j, format!("variable {} violates lower <= average <= upper", j + 1)));
            }
        }
    }
    let eig_real = reals(n, "eigenvalue")?;
    let eig_imag = reals(n, "eigenvalue")?;
    Ok(ContinuationPoint {
        branch_no,
        tpar,
        typ,
        lab,
        tag,
        idx,
        active,
        par_values,
        l2,
        period,
        vars,
        eig_real,
        eig_imag,
    })
}

fn lex_solutions(lines: &[Line], n: usize) -> Result<Vec<SolutionRecord>, AutoError> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let head = lines[k];
        let toks = head.tokens();
        let bad = |msg: String| AutoError::SolutionMalformed { offset: head.offset, msg };
        if toks.len() != 2 {
            return Err(bad("expected a `label samples` header".into()));
        }
        let lab: u32 = toks[0].0.parse().map_err(|_| bad(format!("label `{}` is not an integer", toks[0].0)))?;
        let declared: usize =
            toks[1].0.parse().map_err(|_| bad(format!("sample count `{}` is not an integer", toks[1].0)))?;
        k += 1;
        let mut t = Vec::with_capacity(declared);
        let mut columns = vec![Vec::with_capacity(declared); n];
        while t.len() < declared {
            let row = match lines.get(k) {
                Some(r) => *r,
                None => break,
            };
            let cells = row.tokens();
            if cells.len() != n + 1 {
                if cells.len() == 2 {
                    break;
                }
                return Err(AutoError::SolutionMalformed {
                    offset: row.offset,
                    msg: format!("expected {} columns, found {}", n + 1, cells.len()),
                });
            }
            let vals = cells
                .iter()
                .map(|(s, off)| {
                    s.parse::<f64>().map_err(|_| AutoError::SolutionMalformed {
                        offset: *off,
                        msg: format!("`{}` is not a real", s),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            t.push(vals[0]);
            for (c, v) in columns.iter_mut().zip(&vals[1..]) {
                c.push(*v);
            }
            k += 1;
        }
        if t.len() < declared {
            return Err(AutoError::SolutionLengthMismatch {
                offset: head.offset,
                label: lab,
                declared,
                found: t.len(),
            });
        }
        // rows beyond the declared count
        let mut extra = 0;
        while let Some(row) = lines.get(k) {
            let cells = row.tokens();
            let is_header = cells.len() == 2 && cells.iter().all(|c| c.0.parse::<u64>().is_ok());
            if is_header {
                break;
            }
            extra += 1;
            k += 1;
        }
        if extra > 0 {
            return Err(AutoError::SolutionLengthMismatch {
                offset: head.offset,
                label: lab,
                declared,
                found: declared + extra,
            });
        }
        check_grid(&t, head.offset)?;
        out.push(SolutionRecord { lab, offset: head.offset, t, columns });
    }
    Ok(out)
}

fn check_grid(t: &[f64], offset: usize) -> Result<(), AutoError> {
    let bad = |msg: &str| AutoError::SolutionMalformed { offset, msg: msg.to_string() };
    if t.len() < 2 {
        return Err(bad("a solution needs at least two samples"));
    }
    if t[0] != 0.0 || t[t.len() - 1] != 1.0 {
        return Err(bad("normalized time must run from 0 to 1"));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("normalized time must be strictly increasing"));
    }
    Ok(())
}
