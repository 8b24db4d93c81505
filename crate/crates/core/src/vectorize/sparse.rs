use std::io::Write;

/// Compressed sparse row matrix. Column indices within a row are strictly
/// increasing and only non-zero values are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<T>,
}

pub trait Entry: Copy + PartialEq + Default + std::fmt::Display {}

impl Entry for u32 {}
impl Entry for f64 {}

impl<T: Entry> CsrMatrix<T> {
    pub fn empty(n_cols: usize) -> Self {
        CsrMatrix {
            n_rows: 0,
            n_cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a row given as `(column, value)` pairs sorted by column.
    /// Zero values are skipped.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (u32, T)>) {
        let mut last: Option<u32> = None;
        for (c, v) in entries {
            debug_assert!((c as usize) < self.n_cols, "column {c} out of range");
            debug_assert!(
                last.is_none_or(|l| l < c),
                "columns must be strictly increasing"
            );
            last = Some(c);
            if v != T::default() {
                self.indices.push(c);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
        self.n_rows += 1;
    }

    pub fn from_dense(n_cols: usize, rows: &[Vec<T>]) -> Self {
        let mut m = Self::empty(n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols);
            m.push_row(row.iter().enumerate().map(|(c, &v)| (c as u32, v)));
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[T]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_iter(&self, r: usize) -> impl Iterator<Item = (u32, T)> + '_ {
        let (idx, val) = self.row(r);
        idx.iter().copied().zip(val.iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (idx, val) = self.row(r);
        match idx.binary_search(&(c as u32)) {
            Ok(i) => val[i],
            Err(_) => T::default(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n_rows)
            .map(|r| {
                let mut row = vec![T::default(); self.n_cols];
                for (c, v) in self.row_iter(r) {
                    row[c as usize] = v;
                }
                row
            })
            .collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self::empty(self.n_cols);
        for &r in rows {
            m.push_row(self.row_iter(r));
        }
        m
    }

    /// Applies `f(column, value)` to every stored entry, dropping results that
    /// come out zero.
    pub fn map_values<U: Entry>(&self, mut f: impl FnMut(u32, T) -> U) -> CsrMatrix<U> {
        let mut m = CsrMatrix::empty(self.n_cols);
        for r in 0..self.n_rows {
            m.push_row(self.row_iter(r).map(|(c, v)| (c, f(c, v))));
        }
        m
    }

    /// Number of rows with a stored entry in each column.
    pub fn column_nnz(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_cols];
        for &c in &self.indices {
            counts[c as usize] += 1;
        }
        counts
    }

    /// Writes `row,col,value` lines with a header, for debugging.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,col,value")?;
        for r in 0..self.n_rows {
            for (c, v) in self.row_iter(r) {
                writeln!(out, "{r},{c},{v}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_drops_zeros() {
        let dense = vec![vec![0u32, 2, 1], vec![0, 0, 0], vec![3, 0, 0]];
        let m = CsrMatrix::from_dense(3, &dense);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.to_dense(), dense);
        assert_eq!(m.get(0, 1), 2);
        assert_eq!(m.get(1, 1), 0);
        assert_eq!(m.column_nnz(), vec![1, 1, 1]);
        assert_eq!(
            m.select_rows(&[2, 0]).to_dense(),
            vec![dense[2].clone(), dense[0].clone()]
        );

        let mut buf = Vec::new();
        m.write_triplets(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "row,col,value\n0,1,2\n0,2,1\n2,0,3\n"
        );
    }
}
