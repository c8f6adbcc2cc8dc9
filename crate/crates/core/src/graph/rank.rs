/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
/// Returns `None` if an intermediate value overflows `i128`.
pub fn exact_rank(rows: &[Vec<i64>]) -> Option<usize> {
    let m = rows.len();
    if m == 0 {
        return Some(0);
    }
    let n = rows[0].len();
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| i128::from(v)).collect())
        .collect();
    let mut rank = 0;
    let mut prev: i128 = 1;
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..m {
            for c in col + 1..n {
                let v = a[rank][col]
                    .checked_mul(a[r][c])?
                    .checked_sub(a[r][col].checked_mul(a[rank][c])?)?;
                a[r][c] = v / prev;
            }
            a[r][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
    }
    Some(rank)
}
