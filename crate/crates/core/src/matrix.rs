use crate::error::{invalid, Result};

/// Dense replicate-by-index matrix, one realisation per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateMatrix<T> {
    reps: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Copy> ReplicateMatrix<T> {
    /// Builds a matrix from row-major data.
    pub fn from_row_major(reps: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != reps * width {
            return Err(invalid(
                "data",
                format!(
                    "expected {} entries for {reps}x{width}, found {}",
                    reps * width,
                    data.len()
                ),
            ));
        }
        Ok(Self { reps, width, data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * width);
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return Err(invalid("rows", "rows have different lengths"));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            reps: rows.len(),
            width,
            data,
        })
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    /// Number of columns (indices per replicate).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        // chunks_exact on a zero width would panic
        (0..self.reps).map(move |r| self.row(r))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        self.rows().map(|row| row[c]).collect()
    }

    /// Applies `f` to every entry.
    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> ReplicateMatrix<U> {
        ReplicateMatrix {
            reps: self.reps,
            width: self.width,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}
