use crate::error::{invalid, Error, Result};

/// Sparse parity-check matrix stored by rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    pub n_vars: usize,
    pub n_checks: usize,
    /// Per-check variable indices, ascending.
    pub rows: Vec<Vec<usize>>,
}

impl LdpcCode {
    /// Validates and normalizes (sorts) the rows.
    pub fn new(n_vars: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        if n_vars == 0 {
            return invalid("code needs at least one variable");
        }
        for (c, row) in rows.iter_mut().enumerate() {
            if row.is_empty() {
                return invalid(format!("check {c} has no variables"));
            }
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("check {c} lists a variable twice"));
            }
            if let Some(&v) = row.iter().find(|&&v| v >= n_vars) {
                return invalid(format!("check {c} references variable {v} >= {n_vars}"));
            }
        }
        Ok(Self { n_vars, n_checks: rows.len(), rows })
    }

    /// Per-variable check lists, ascending.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n_vars];
        for (c, row) in self.rows.iter().enumerate() {
            for &v in row {
                cols[v].push(c);
            }
        }
        cols
    }

    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Design rate `1 - m/n`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.n_checks as f64 / self.n_vars as f64
    }

    /// True when every row has even overlap with `word`.
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ (word[v] & 1)) == 0)
    }

    /// Serialize in the alist layout with zero padding.
    pub fn to_alist(&self) -> String {
        use std::fmt::Write;
        let cols = self.columns();
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let join = |xs: &mut dyn Iterator<Item = usize>| {
            xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        writeln!(out, "{} {}", self.n_vars, self.n_checks).unwrap();
        writeln!(out, "{max_col} {max_row}").unwrap();
        writeln!(out, "{}", join(&mut cols.iter().map(Vec::len))).unwrap();
        writeln!(out, "{}", join(&mut self.rows.iter().map(Vec::len))).unwrap();
        for col in &cols {
            let padded = col.iter().map(|c| c + 1).chain(std::iter::repeat(0)).take(max_col);
            writeln!(out, "{}", join(&mut padded.into_iter())).unwrap();
        }
        for row in &self.rows {
            let padded = row.iter().map(|v| v + 1).chain(std::iter::repeat(0)).take(max_row);
            writeln!(out, "{}", join(&mut padded.into_iter())).unwrap();
        }
        out
    }
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// Parse an alist description of a parity-check matrix.
///
/// Blank lines are skipped. Adjacency lines may be zero padded. Column and
/// row adjacency must describe the same matrix.
pub fn load_alist(text: &str) -> Result<LdpcCode> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next_nums = |want: Option<usize>| -> Result<(usize, Vec<usize>)> {
        let Some((ln, line)) = lines.next() else {
            return parse_err(0, "unexpected end of input");
        };
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>();
        let Ok(nums) = nums else {
            return parse_err(ln, "expected non-negative integers");
        };
        if let Some(w) = want {
            if nums.len() != w {
                return parse_err(ln, format!("expected {w} entries, found {}", nums.len()));
            }
        }
        Ok((ln, nums))
    };

    let (ln, dims) = next_nums(Some(2))?;
    let (n, m) = (dims[0], dims[1]);
    if n == 0 {
        return parse_err(ln, "zero columns");
    }
    let (_, maxes) = next_nums(Some(2))?;
    let (max_col, max_row) = (maxes[0], maxes[1]);
    let (ln_cd, col_deg) = next_nums(Some(n))?;
    let (ln_rd, row_deg) = next_nums(Some(m))?;
    if col_deg.iter().any(|&d| d > max_col) {
        return parse_err(ln_cd, "column degree exceeds declared maximum");
    }
    if row_deg.iter().any(|&d| d > max_row) {
        return parse_err(ln_rd, "row degree exceeds declared maximum");
    }

    let mut read_adj = |count: usize, bound: usize, degs: &[usize]| -> Result<Vec<Vec<usize>>> {
        let mut adj = Vec::with_capacity(count);
        for &deg in degs.iter().take(count) {
            let (ln, nums) = next_nums(None)?;
            let (live, pad) = nums.split_at(deg.min(nums.len()));
            if live.len() != deg || pad.iter().any(|&x| x != 0) {
                return parse_err(ln, format!("expected {deg} indices plus zero padding"));
            }
            let mut list = Vec::with_capacity(deg);
            for &x in live {
                if x == 0 || x > bound {
                    return parse_err(ln, format!("index {x} out of range 1..={bound}"));
                }
                list.push(x - 1);
            }
            let mut sorted = list.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return parse_err(ln, "duplicate index");
            }
            adj.push(sorted);
        }
        Ok(adj)
    };
    let cols = read_adj(n, m, &col_deg)?;
    let rows = read_adj(m, n, &row_deg)?;

    let mut from_cols = vec![Vec::new(); m];
    for (v, col) in cols.iter().enumerate() {
        for &c in col {
            from_cols[c].push(v);
        }
    }
    if let Some(c) = (0..m).find(|&c| from_cols[c] != rows[c]) {
        return parse_err(ln_rd, format!("row {} disagrees with column adjacency", c + 1));
    }
    LdpcCode::new(n, rows).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Parse { line: ln, msg },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";

    #[test]
    fn parses_two_row_example() {
        let code = load_alist(SMALL).unwrap();
        assert_eq!(code.n_vars, 3);
        assert_eq!(code.rows, vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn rejects_inconsistent_adjacency() {
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 3\n2 3\n";
        assert!(matches!(load_alist(bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn rejects_out_of_range_with_line() {
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 5\n2 0\n1 2\n2 3\n";
        match load_alist(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_truncation() {
        assert!(load_alist("3 2\n2 2\n1 2 1\n2 2\n1 0\n1 1\n2 0\n1 2\n2 3\n").is_err());
        assert!(load_alist("3 2\n2 2\n1 2 1\n").is_err());
    }

    #[test]
    fn writer_round_trips() {
        let code = load_alist(SMALL).unwrap();
        assert_eq!(load_alist(&code.to_alist()).unwrap(), code);
    }

    #[test]
    fn codeword_check() {
        let code = load_alist(SMALL).unwrap();
        assert!(code.is_codeword(&[1, 1, 1]));
        assert!(!code.is_codeword(&[1, 0, 0]));
    }
}
