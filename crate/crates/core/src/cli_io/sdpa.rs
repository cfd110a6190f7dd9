//! SDPA sparse format (.dat-s) reader and writer.
//!
//! The file encodes `min sum_i c_i x_i  s.t.  X = sum_i F_i x_i - F_0 PSD`.
//! Loading maps that onto the internal dual form `sup <b, y> : c - sum A_i
//! y_i PSD` via `b = -c_sdpa`, `c = -F_0`, `A_i = -F_i`, so the reported
//! value relates to the SDPA objective by a sign flip. Blocks are flattened
//! into one block-diagonal matrix space: facial reduction mixes blocks
//! anyway.

use std::path::Path;

use crate::linalg::SymMatrix;
use crate::model::{LinearMapA, Result, SdpError, SdpProblem};

fn parse_err(line: usize, msg: impl Into<String>) -> SdpError {
    SdpError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Tokenizes a line of an SDPA file: separators are whitespace plus the
/// decorative braces/commas the format allows.
fn tokens(line: &str) -> Vec<&str> {
    line.split(|ch: char| ch.is_whitespace() || matches!(ch, '{' | '}' | '(' | ')' | ','))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Reads a problem from SDPA sparse format.
pub fn read_sdpa(path: &Path) -> Result<SdpProblem> {
    let text = std::fs::read_to_string(path)?;
    read_sdpa_str(&text)
}

/// Parses SDPA sparse format from a string (line numbers are 1-based in
/// errors).
pub fn read_sdpa_str(text: &str) -> Result<SdpProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('"') && !t.starts_with('*')
        });

    let (ln, l) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing mDIM line"))?;
    let m: usize = tokens(l)
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "malformed mDIM"))?;

    let (ln, l) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing nBLOCK line"))?;
    let nblocks: usize = tokens(l)
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "malformed nBLOCK"))?;
    if nblocks == 0 {
        return Err(parse_err(ln, "nBLOCK must be positive"));
    }

    let (ln, l) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing block structure line"))?;
    let raw_sizes: Vec<i64> = tokens(l)
        .iter()
        .map(|t| t.parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(ln, "malformed block structure"))?;
    if raw_sizes.len() != nblocks {
        return Err(parse_err(
            ln,
            format!("expected {nblocks} block sizes, found {}", raw_sizes.len()),
        ));
    }
    // Negative size = diagonal block: only i == j entries are legal there.
    let diag: Vec<bool> = raw_sizes.iter().map(|&s| s < 0).collect();
    let sizes: Vec<usize> = raw_sizes
        .iter()
        .map(|&s| {
            let a = s.unsigned_abs() as usize;
            if a == 0 {
                Err(parse_err(ln, "zero block size"))
            } else {
                Ok(a)
            }
        })
        .collect::<Result<_>>()?;
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0usize, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let n: usize = sizes.iter().sum();

    let (ln, l) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing objective vector line"))?;
    let mut cvec: Vec<f64> = tokens(l)
        .iter()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(ln, "malformed objective vector"))?;
    // The vector may continue on following lines.
    let mut rest: Vec<(usize, &str)> = lines.collect();
    let mut rest_idx = 0;
    while cvec.len() < m && rest_idx < rest.len() {
        let (ln2, l2) = rest[rest_idx];
        let ts = tokens(l2);
        // A 5-token line that parses as an entry ends the vector.
        if cvec.len() == m {
            break;
        }
        let more: std::result::Result<Vec<f64>, _> = ts.iter().map(|t| t.parse::<f64>()).collect();
        match more {
            Ok(vals) => {
                cvec.extend(vals);
                rest_idx += 1;
            }
            Err(_) => return Err(parse_err(ln2, "malformed objective vector continuation")),
        }
    }
    if cvec.len() != m {
        return Err(parse_err(
            ln,
            format!("expected {m} objective entries, found {}", cvec.len()),
        ));
    }
    rest.drain(..rest_idx);

    // F_0 .. F_m assembled block-diagonally, mirrored from upper triangle.
    let mut fmats: Vec<SymMatrix> = (0..=m).map(|_| SymMatrix::zeros(n)).collect();
    let mut seen = std::collections::HashSet::new();
    for (ln, l) in rest {
        let ts = tokens(l);
        if ts.is_empty() {
            continue;
        }
        if ts.len() != 5 {
            return Err(parse_err(
                ln,
                format!("expected 5 fields, found {}", ts.len()),
            ));
        }
        let matno: usize = ts[0]
            .parse()
            .map_err(|_| parse_err(ln, "malformed matrix number"))?;
        let blockno: usize = ts[1]
            .parse()
            .map_err(|_| parse_err(ln, "malformed block number"))?;
        let i: usize = ts[2]
            .parse()
            .map_err(|_| parse_err(ln, "malformed row index"))?;
        let j: usize = ts[3]
            .parse()
            .map_err(|_| parse_err(ln, "malformed column index"))?;
        let value: f64 = ts[4]
            .parse()
            .map_err(|_| parse_err(ln, "malformed value"))?;
        if matno > m {
            return Err(parse_err(
                ln,
                format!("matrix number {matno} out of range 0..{m}"),
            ));
        }
        if blockno == 0 || blockno > nblocks {
            return Err(parse_err(
                ln,
                format!("block number {blockno} out of range 1..{nblocks}"),
            ));
        }
        let bsize = sizes[blockno - 1];
        if i == 0 || j == 0 || i > bsize || j > bsize {
            return Err(parse_err(
                ln,
                format!("index ({i}, {j}) out of range for block of size {bsize}"),
            ));
        }
        if i > j {
            return Err(parse_err(
                ln,
                "only upper-triangle entries are accepted (i <= j)",
            ));
        }
        if diag[blockno - 1] && i != j {
            return Err(parse_err(ln, "off-diagonal entry in a diagonal block"));
        }
        if !seen.insert((matno, blockno, i, j)) {
            return Err(parse_err(
                ln,
                format!("duplicate entry ({matno}, {blockno}, {i}, {j})"),
            ));
        }
        let off = offsets[blockno - 1];
        fmats[matno].set_sym(off + i - 1, off + j - 1, value);
    }

    let b: Vec<f64> = cvec.iter().map(|v| -v).collect();
    let c = fmats[0].scale(-1.0);
    let mats: Vec<SymMatrix> = fmats[1..].iter().map(|f| f.scale(-1.0)).collect();
    SdpProblem::dual_form(LinearMapA::new(n, mats)?, b, c)
}

/// Writes a dual-form problem as SDPA sparse format with a single block.
pub fn write_sdpa(problem: &SdpProblem, comment: &str) -> String {
    let n = problem.n();
    let m = problem.m();
    let mut out = String::new();
    for line in comment.lines() {
        out.push_str(&format!("\"{line}\n"));
    }
    out.push_str(&format!("{m}\n1\n{n}\n"));
    let cvec: Vec<String> = problem.b.iter().map(|v| format!("{}", -v)).collect();
    out.push_str(&cvec.join(" "));
    out.push('\n');
    let mut emit = |matno: usize, mat: &SymMatrix| {
        for i in 0..n {
            for j in i..n {
                let v = -mat.get(i, j);
                if v != 0.0 {
                    out.push_str(&format!("{matno} 1 {} {} {}\n", i + 1, j + 1, v));
                }
            }
        }
    };
    emit(0, &problem.c);
    for (k, a) in problem.a.mats().iter().enumerate() {
        emit(k + 1, a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_round_trip() {
        // sup y s.t. [[1, y], [y, 9]] PSD as a hand-built file.
        let text = "\
\"sqrt gadget
1
1
2
-1.0
0 1 1 1 -1
0 1 2 2 -9
1 1 1 2 1
";
        let p = read_sdpa_str(text).unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.m(), 1);
        assert_eq!(p.b, vec![1.0]);
        assert_eq!(p.c.get(0, 0), 1.0);
        assert_eq!(p.c.get(1, 1), 9.0);
        assert_eq!(p.a.mat(0).get(0, 1), -1.0);
    }

    #[test]
    fn duplicate_entry_rejected() {
        let text = "1\n1\n2\n0.0\n1 1 1 1 1.0\n1 1 1 1 2.0\n";
        match read_sdpa_str(text) {
            Err(SdpError::Parse { line, msg }) => {
                assert_eq!(line, 6);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn lower_triangle_rejected() {
        let text = "1\n1\n2\n0.0\n1 1 2 1 1.0\n";
        assert!(matches!(read_sdpa_str(text), Err(SdpError::Parse { .. })));
    }

    #[test]
    fn diagonal_block_entries() {
        let text = "1\n2\n2 -2\n1.0\n0 1 1 2 1.0\n0 2 1 1 3.0\n1 2 2 2 -1.0\n";
        let p = read_sdpa_str(text).unwrap();
        assert_eq!(p.n(), 4);
        // F0 entries mirrored and negated into c.
        assert_eq!(p.c.get(0, 1), -1.0);
        assert_eq!(p.c.get(2, 2), -3.0);
        assert_eq!(p.a.mat(0).get(3, 3), 1.0);
        // Off-diagonal in the diagonal block fails.
        let bad = "1\n2\n2 -2\n1.0\n0 2 1 2 1.0\n";
        assert!(read_sdpa_str(bad).is_err());
    }

    #[test]
    fn writer_reader_round_trip() {
        let mut a1 = SymMatrix::zeros(3);
        a1.set_sym(0, 2, 0.5);
        a1.set_sym(1, 1, -2.0);
        let mut c = SymMatrix::zeros(3);
        c.set_sym(0, 0, 1.0);
        c.set_sym(1, 2, -0.25);
        let p =
            SdpProblem::dual_form(LinearMapA::new(3, vec![a1]).unwrap(), vec![0.75], c).unwrap();
        let text = write_sdpa(&p, "round trip");
        let q = read_sdpa_str(&text).unwrap();
        assert_eq!(q.b, p.b);
        assert!(q.c.sub(&p.c).frob_norm() < 1e-15);
        assert!(q.a.mat(0).sub(p.a.mat(0)).frob_norm() < 1e-15);
    }

    #[test]
    fn braces_and_comments_tolerated() {
        let text = "* header comment\n2\n1\n{2}\n{1.0, -2.0}\n1 1 1 1 1.0\n2 1 1 2 3.0\n";
        let p = read_sdpa_str(text).unwrap();
        assert_eq!(p.m(), 2);
        assert_eq!(p.b, vec![-1.0, 2.0]);
    }
}
