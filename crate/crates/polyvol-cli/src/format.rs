//! The `.hpoly` text format.
//!
//! Line one holds `m d`; the next m lines hold `a_i1 ... a_id b_i`, the row
//! of A and the right-hand side of one constraint `a_i . x <= b_i`. `#`
//! starts a comment anywhere on a line, blank lines are skipped. The writer
//! prints every value with 17 significant digits, which reproduces an f64
//! bit-for-bit on re-parse, so write -> read round-trips exactly.

use polyvol::HPolytope;

use crate::CliError;

pub fn parse_polytope(text: &str) -> Result<HPolytope, CliError> {
    let mut lines = text.lines().enumerate().filter_map(|(idx, raw)| {
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            None
        } else {
            Some((idx + 1, content))
        }
    });

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| CliError::Format { line: 0, message: "file holds no data lines".into() })?;
    let mut dims = header.split_whitespace();
    let m: usize = parse_field(dims.next(), header_line, "row count m")?;
    let d: usize = parse_field(dims.next(), header_line, "dimension d")?;
    if dims.next().is_some() {
        return Err(CliError::Format {
            line: header_line,
            message: "header must be exactly `m d`".into(),
        });
    }

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for _ in 0..m {
        let (line_no, line) = lines.next().ok_or_else(|| CliError::Format {
            line: header_line,
            message: format!("expected {m} constraint rows, file ends after {}", rows.len()),
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != d + 1 {
            return Err(CliError::Format {
                line: line_no,
                message: format!("expected {} values (d + 1), got {}", d + 1, fields.len()),
            });
        }
        let mut row = Vec::with_capacity(d);
        for field in &fields[..d] {
            row.push(parse_field(Some(field), line_no, "coefficient")?);
        }
        rows.push(row);
        rhs.push(parse_field(Some(fields[d]), line_no, "right-hand side")?);
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(CliError::Format {
            line: line_no,
            message: format!("trailing content after the {m} declared rows"),
        });
    }
    HPolytope::from_rows(&rows, rhs).map_err(CliError::Poly)
}

pub fn write_polytope(p: &HPolytope) -> String {
    let mut out = format!("{} {}\n", p.num_rows(), p.dim());
    for i in 0..p.num_rows() {
        for v in p.row(i) {
            out.push_str(&format!("{v:.16e} "));
        }
        out.push_str(&format!("{:.16e}\n", p.rhs()[i]));
    }
    out
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, CliError> {
    let field = field.ok_or_else(|| CliError::Format {
        line,
        message: format!("missing {what}"),
    })?;
    field.parse().map_err(|_| CliError::Format {
        line,
        message: format!("cannot parse {what} from `{field}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyvol::generators;
    use polyvol::RngStream;

    #[test]
    fn parses_a_square() {
        let text = "# the unit square, scaled by 1\n4 2\n1 0 1\n-1 0 1  # left\n0 1 1\n0 -1 1\n";
        let p = parse_polytope(text).unwrap();
        assert_eq!((p.num_rows(), p.dim()), (4, 2));
        assert!(p.contains(&[0.9, -0.9]).unwrap());
        assert!(!p.contains(&[1.1, 0.0]).unwrap());
    }

    #[test]
    fn header_mismatch_reports_line() {
        // The file ends early, so the complaint points back at the header
        // that promised two rows.
        let err = parse_polytope("2 1\n1 1\n").unwrap_err();
        match err {
            CliError::Format { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("file ends after 1"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn wrong_field_count_reports_line() {
        let err = parse_polytope("1 2\n1 0 0 1\n").unwrap_err();
        match err {
            CliError::Format { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("expected 3 values"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_number_reports_line() {
        let err = parse_polytope("1 1\nfoo 1\n").unwrap_err();
        match err {
            CliError::Format { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("foo"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn trailing_rows_rejected() {
        let err = parse_polytope("1 1\n1 1\n1 2\n").unwrap_err();
        match err {
            CliError::Format { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_rejected() {
        assert!(parse_polytope("# nothing\n\n").is_err());
    }

    #[test]
    fn write_read_round_trips_bit_identically() {
        let mut rng = RngStream::new(31);
        let bodies = vec![
            generators::cube(3).unwrap(),
            generators::skinny_cube(4).unwrap(),
            generators::random_tangent(3, 9, &mut rng).unwrap(),
            generators::birkhoff(3).unwrap(),
        ];
        for p in bodies {
            let text = write_polytope(&p);
            let q = parse_polytope(&text).unwrap();
            assert_eq!(p.num_rows(), q.num_rows());
            assert_eq!(p.dim(), q.dim());
            for i in 0..p.num_rows() {
                assert_eq!(p.rhs()[i].to_bits(), q.rhs()[i].to_bits());
                for (a, b) in p.row(i).iter().zip(q.row(i)) {
                    assert_eq!(a.to_bits(), b.to_bits());
                }
            }
            // The written form is canonical: writing again changes nothing.
            assert_eq!(text, write_polytope(&q));
        }
    }

    #[test]
    fn random_values_round_trip() {
        let mut rng = RngStream::new(8);
        for _ in 0..200 {
            let v = (rng.uniform() - 0.5) * 10f64.powi((rng.uniform_int(17) as i32) - 8);
            let text = format!("{v:.16e}");
            let back: f64 = text.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{text}");
        }
    }
}
