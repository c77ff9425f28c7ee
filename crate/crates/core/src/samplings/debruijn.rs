/// The lexicographically least de Bruijn sequence over `0..k` of order `n`,
/// as the concatenation of the Lyndon words whose length divides `n`
/// (Fredricksen–Kessler–Maiorana).
///
/// Read cyclically, every word of length `n` occurs exactly once.
pub fn de_bruijn(k: u8, n: usize) -> Vec<u8> {
    if k == 0 || n == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![0];
    }
    let mut a = vec![0u8; n + 1];
    let mut seq = Vec::with_capacity((k as usize).pow(n as u32));
    fkm(1, 1, k, n, &mut a, &mut seq);
    seq
}

fn fkm(t: usize, p: usize, k: u8, n: usize, a: &mut [u8], seq: &mut Vec<u8>) {
    if t > n {
        if n % p == 0 {
            seq.extend_from_slice(&a[1..=p]);
        }
        return;
    }
    a[t] = a[t - p];
    fkm(t + 1, p, k, n, a, seq);
    for j in a[t - p] + 1..k {
        a[t] = j;
        fkm(t + 1, t, k, n, a, seq);
    }
}
