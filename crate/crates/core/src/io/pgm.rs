use std::fs;
use std::path::Path;

use super::IoError;
use crate::linalg::DenseMatrix;

/// Binary PGM (P5), one pixel per entry, rows top to bottom. Values map
/// linearly from [min, max] onto 0..=255; a constant matrix is mid-gray.
pub fn heatmap_bytes(a: &DenseMatrix) -> Result<Vec<u8>, IoError> {
    if !a.all_finite() {
        return Err(IoError::Render("matrix has non-finite entries".into()));
    }
    let (rows, cols) = a.shape();
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    let (lo, hi) = a
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    out.extend(a.as_slice().iter().map(|&v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            128
        }
    }));
    Ok(out)
}

pub fn render_heatmap(a: &DenseMatrix, path: &Path) -> Result<(), IoError> {
    fs::write(path, heatmap_bytes(a)?).map_err(|e| IoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(bytes: &[u8]) -> (String, &[u8]) {
        // header is three newline-terminated lines
        let mut seen = 0;
        let end = bytes
            .iter()
            .position(|&b| {
                seen += usize::from(b == b'\n');
                seen == 3
            })
            .unwrap();
        (String::from_utf8(bytes[..=end].to_vec()).unwrap(), &bytes[end + 1..])
    }

    #[test]
    fn anti_diagonal_pixels() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let bytes = heatmap_bytes(&a).unwrap();
        let (header, pixels) = split(&bytes);
        assert_eq!(header, "P5\n2 2\n255\n");
        assert_eq!(pixels, &[0, 255, 255, 0]);
    }

    #[test]
    fn constant_is_mid_gray_and_dims_kept() {
        let a = DenseMatrix::from_fn(3, 5, |_, _| -2.5);
        let bytes = heatmap_bytes(&a).unwrap();
        let (header, pixels) = split(&bytes);
        let dims: Vec<usize> = header.lines().nth(1).unwrap().split(' ').map(|s| s.parse().unwrap()).collect();
        assert_eq!(dims, vec![5, 3]);
        assert_eq!(pixels, &[128u8; 15][..]);
    }
}
