//! Small shared helpers: atomic file writes, CSV assembly, rank correlation.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Write a file atomically: write to a sibling temporary path, then rename.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::input(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let write = || -> std::io::Result<()> {
        let mut file = fs::File::create(tmp)?;
        file.write_all(contents)?;
        file.flush()?;
        fs::rename(tmp, path)
    };
    write().map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

/// Assemble an RFC-4180-style CSV: a header row plus one row per record.
/// Fields here are plain numerics and names, so no quoting is needed.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Spearman rank correlation between `values` and their index order.
/// Ties receive averaged ranks.
pub fn spearman_vs_index(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let ranks = average_ranks(values);
    let index_ranks: Vec<f64> = (0..n).map(|i| i as f64).collect();
    pearson(&ranks, &index_ranks)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0;
        for &index in &order[i..=j] {
            ranks[index] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mean_x) * (b - mean_y);
        var_x += (a - mean_x) * (a - mean_x);
        var_y += (b - mean_y) * (b - mean_y);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return 0.0;
    }
    cov / (var_x * var_y).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_monotone_sequences() {
        assert_eq!(spearman_vs_index(&[1.0, 2.0, 5.0, 9.0]), 1.0);
        assert_eq!(spearman_vs_index(&[9.0, 5.0, 2.0, 1.0]), -1.0);
        assert_eq!(spearman_vs_index(&[1.0, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn csv_shape() {
        let text = csv(
            &["a", "b"],
            &[vec!["1".into(), "2".into()], vec!["3".into(), "4".into()]],
        );
        assert_eq!(text, "a,b\n1,2\n3,4\n");
    }
}
