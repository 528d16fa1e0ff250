//! Achievability points `(M1, M2, Rbar)` for external plotting.

use std::io;

use hiercc_core::rates::{composite, RateReport};
use hiercc_core::{Rational, SchemeId, SystemConfig};
use serde::Serialize;

pub const CSV_HEADER: [&str; 13] = [
    "point",
    "m1_frac",
    "m2_frac",
    "r1_frac",
    "r2_frac",
    "rbar_frac",
    "m1",
    "m2",
    "r1",
    "r2",
    "rbar",
    "source",
    "note",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Point {
    pub label: String,
    pub m1: Rational,
    pub m2: Rational,
    pub r1: Rational,
    pub r2: Rational,
    pub rbar: Rational,
    /// `corner` for the trivial points, `computed` for the schemes.
    pub source: &'static str,
    pub note: String,
}

/// The three trivial corners with their rates as published, then the
/// two scheme points from the closed forms. No interpolation between them.
pub fn points(cfg: &SystemConfig) -> Vec<Point> {
    let n = Rational::integer(cfg.files() as i64);
    let zero = Rational::zero();
    let k2 = Rational::integer(cfg.users_per_mirror() as i64);
    let corner = |label: &str, m1: &Rational, m2: &Rational, r2: &Rational, note: &str| Point {
        label: label.to_string(),
        m1: m1.clone(),
        m2: m2.clone(),
        r1: zero.clone(),
        r2: r2.clone(),
        rbar: composite(&zero, r2, cfg.mirrors()),
        source: "corner",
        note: note.to_string(),
    };
    let mut out = vec![
        corner("corner (0,N)", &zero, &n, &zero, "as-stated-in-paper"),
        corner("corner (N,0)", &n, &zero, &k2, ""),
        corner("corner (N,N)", &n, &n, &zero, ""),
    ];
    for scheme in [SchemeId::First, SchemeId::Second] {
        let (m1, m2, r1, r2, flags) = RateReport::formulas(cfg, scheme);
        out.push(Point {
            label: format!("scheme {scheme}"),
            rbar: composite(&r1, &r2, cfg.mirrors()),
            m1,
            m2,
            r1,
            r2,
            source: "computed",
            note: flags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
        });
    }
    out
}

pub fn write_csv(points: &[Point], out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        let vals = [&p.m1, &p.m2, &p.r1, &p.r2, &p.rbar];
        let mut rec = vec![p.label.clone()];
        rec.extend(vals.iter().map(|v| v.to_string()));
        rec.extend(vals.iter().map(|v| v.to_decimal(2)));
        rec.push(p.source.to_string());
        rec.push(p.note.clone());
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_points() {
        let cfg = SystemConfig::new(3, 2, 6, 1, None).unwrap();
        let p = points(&cfg);
        assert_eq!(p.len(), 5);
        assert_eq!(p[0].note, "as-stated-in-paper");
        assert_eq!((p[0].m2.clone(), p[0].rbar.clone()), (Rational::integer(6), Rational::zero()));
        assert_eq!(p[1].rbar, Rational::integer(6));
        let s1 = &p[3];
        assert_eq!(
            (s1.m1.to_decimal(3), s1.m2.to_decimal(1), s1.rbar.to_decimal(1)),
            ("4.067".into(), "1.6".into(), "3.9".into())
        );
        let s2 = &p[4];
        assert_eq!(
            (s2.m1.to_decimal(1), s2.m2.to_decimal(2), s2.rbar.to_decimal(1)),
            ("2.4".into(), "2.43".into(), "3.2".into())
        );
    }
}
