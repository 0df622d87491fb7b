//! CSV output: one `#` line echoing the parameters, a header row, then
//! values in shortest round-trip decimal form.

use std::io::{self, Write};

use crate::climit::{CouplingScan, ScalingScan};
use crate::curve::DcsCurve;
use crate::trajectory::{HistogramComparison, Vec2};

pub fn write_table<W, R, I>(mut out: W, comment: &str, header: &[&str], rows: R) -> io::Result<()>
where
    W: Write,
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = String>,
{
    writeln!(out, "# {comment}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())?;
    }
    w.flush()
}

pub fn write_curve<W: Write>(out: W, comment: &str, curve: &DcsCurve) -> io::Result<()> {
    let rows = curve
        .grid
        .thetas
        .iter()
        .zip(&curve.values)
        .map(|(t, v)| [t.to_string(), v.to_string()]);
    write_table(out, comment, &["theta", "dcs"], rows)
}

pub fn write_path<W: Write>(out: W, comment: &str, path: &[Vec2]) -> io::Result<()> {
    let rows = path.iter().map(|p| [p[0].to_string(), p[1].to_string()]);
    write_table(out, comment, &["x", "y"], rows)
}

pub fn write_scan<W: Write>(out: W, comment: &str, scan: &ScalingScan) -> io::Result<()> {
    let rows = (0..scan.len()).map(|i| {
        [
            scan.lambdas[i].to_string(),
            scan.s_p[i].to_string(),
            scan.s_phi[i].to_string(),
            scan.envelopes[i].to_string(),
        ]
    });
    write_table(out, comment, &["lambda", "s_p", "s_phi", "envelope"], rows)
}

pub fn write_coupling_scan<W: Write>(out: W, comment: &str, scan: &CouplingScan) -> io::Result<()> {
    let rows = scan
        .s_phi
        .iter()
        .zip(&scan.envelopes)
        .map(|(f, e)| [f.to_string(), e.to_string()]);
    write_table(out, comment, &["s_phi", "envelope"], rows)
}

pub fn write_comparison<W: Write>(
    out: W,
    comment: &str,
    cmp: &HistogramComparison,
) -> io::Result<()> {
    let rows = cmp.bins.iter().map(|b| {
        [
            b.theta_lo.to_string(),
            b.theta_hi.to_string(),
            b.count.to_string(),
            b.expected.to_string(),
            b.analytic_dcs.to_string(),
            b.mc_dcs.to_string(),
            b.sigma_deviation.to_string(),
            b.scored.to_string(),
        ]
    });
    write_table(
        out,
        comment,
        &[
            "theta_lo",
            "theta_hi",
            "count",
            "expected",
            "analytic_dcs",
            "mc_dcs",
            "sigma_deviation",
            "scored",
        ],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let values = [
            0.1,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            5e-324,
            -7.389056098930651,
            1.505851611679784e-4,
            0.0,
            -0.0,
        ];
        let mut buf = Vec::new();
        write_table(
            &mut buf,
            "k=v",
            &["a"],
            values.iter().map(|v| [v.to_string()]),
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# k=v"));
        assert_eq!(lines.next(), Some("a"));
        for (line, v) in lines.zip(values) {
            assert_eq!(line.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
