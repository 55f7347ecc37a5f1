//! Dense GF(2)[t] arithmetic on packed 64-bit words, and the bit-sliced
//! GF(2^m)[t] product built on top of it.

use crate::gf2m::{FieldCtx, FieldElem};

const KARATSUBA_WORDS: usize = 16;

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Carry-less 64x64 -> 128 bit product with 4-bit windows.
fn clmul_portable(a: u64, b: u64) -> (u64, u64) {
    let mut table = [0u128; 16];
    table[1] = b as u128;
    for i in 2..16 {
        table[i] = if i % 2 == 0 { table[i / 2] << 1 } else { table[i - 1] ^ b as u128 };
    }
    let mut r: u128 = 0;
    for k in (0..16).rev() {
        r = (r << 4) ^ table[((a >> (4 * k)) & 15) as usize];
    }
    (r as u64, (r >> 64) as u64)
}

fn mul_base_portable(a: &[u64], b: &[u64], out: &mut [u64]) {
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let (lo, hi) = clmul_portable(x, y);
            out[i + j] ^= lo;
            out[i + j + 1] ^= hi;
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "pclmulqdq")]
unsafe fn mul_base_clmul(a: &[u64], b: &[u64], out: &mut [u64]) {
    use std::arch::x86_64::{_mm_clmulepi64_si128, _mm_cvtsi128_si64, _mm_set_epi64x, _mm_unpackhi_epi64};
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let xv = _mm_set_epi64x(0, x as i64);
        for (j, &y) in b.iter().enumerate() {
            let r = _mm_clmulepi64_si128(xv, _mm_set_epi64x(0, y as i64), 0);
            out[i + j] ^= _mm_cvtsi128_si64(r) as u64;
            out[i + j + 1] ^= _mm_cvtsi128_si64(_mm_unpackhi_epi64(r, r)) as u64;
        }
    }
}

/// Schoolbook product over words; `out` must hold `a.len() + b.len()`
/// words and is accumulated into.
fn mul_base(a: &[u64], b: &[u64], out: &mut [u64]) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("pclmulqdq") {
        // SAFETY: the CPU supports the instruction, checked just above.
        unsafe { mul_base_clmul(a, b, out) };
        return;
    }
    mul_base_portable(a, b, out);
}

fn mul_into(a: &[u64], b: &[u64], out: &mut [u64]) {
    let (a, b) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if a.is_empty() {
        return;
    }
    if a.len() < KARATSUBA_WORDS {
        mul_base(a, b, out);
        return;
    }
    if b.len() > a.len() {
        // Unbalanced: cut the longer operand into blocks of the shorter length.
        for (i, chunk) in b.chunks(a.len()).enumerate() {
            let off = i * a.len();
            mul_into(a, chunk, &mut out[off..off + a.len() + chunk.len()]);
        }
        return;
    }
    let n = a.len();
    let h = n / 2;
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);
    let mut z0 = vec![0u64; 2 * h];
    mul_into(a0, b0, &mut z0);
    let mut z2 = vec![0u64; 2 * (n - h)];
    mul_into(a1, b1, &mut z2);
    let mut sa = a1.to_vec();
    xor_into(&mut sa, a0);
    let mut sb = b1.to_vec();
    xor_into(&mut sb, b0);
    let mut z1 = vec![0u64; 2 * (n - h)];
    mul_into(&sa, &sb, &mut z1);
    xor_into(&mut z1, &z0);
    xor_into(&mut z1, &z2);
    xor_into(&mut out[..2 * h], &z0);
    xor_into(&mut out[h..h + z1.len()], &z1);
    xor_into(&mut out[2 * h..2 * h + z2.len()], &z2);
}

/// Full product of two packed GF(2) polynomials.
pub(crate) fn gf2_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len()];
    mul_into(a, b, &mut out);
    out
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Product of two coefficient vectors over GF(2^m), truncated to `n` terms.
pub(crate) fn mul_trunc(ctx: &FieldCtx, a: &[FieldElem], b: &[FieldElem], n: usize) -> Vec<FieldElem> {
    let a = &a[..a.len().min(n)];
    let b = &b[..b.len().min(n)];
    let mut out = vec![FieldElem::ZERO; n];
    if a.is_empty() || b.is_empty() {
        return out;
    }
    if a.len().min(b.len()) <= 48 {
        for (i, &ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            let lim = b.len().min(n - i);
            for (j, &bj) in b[..lim].iter().enumerate() {
                let p = ctx.mul(ai, bj);
                out[i + j].0 ^= p.0;
            }
        }
        return out;
    }
    let m = ctx.m() as usize;
    let split = |v: &[FieldElem]| -> Vec<Vec<u64>> {
        let mut planes = vec![vec![0u64; words_for(v.len())]; m];
        for (i, c) in v.iter().enumerate() {
            let mut bits = c.0;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                planes[k][i / 64] |= 1 << (i % 64);
                bits &= bits - 1;
            }
        }
        planes
    };
    let pa = split(a);
    let pb = split(b);
    // x^e reduced into the power basis, for e < 2m - 1.
    let reduce: Vec<u8> = (0..2 * m - 1).map(|e| if m == 1 { 1 } else { ctx.pow(FieldElem(2), e as u64).0 }).collect();
    let nw = words_for(n);
    let mut acc = vec![vec![0u64; nw]; m];
    for (j, aj) in pa.iter().enumerate() {
        if aj.iter().all(|&w| w == 0) {
            continue;
        }
        for (k, bk) in pb.iter().enumerate() {
            if bk.iter().all(|&w| w == 0) {
                continue;
            }
            let prod = gf2_mul(aj, bk);
            let mut red = reduce[j + k];
            while red != 0 {
                let l = red.trailing_zeros() as usize;
                let lim = nw.min(prod.len());
                xor_into(&mut acc[l][..lim], &prod[..lim]);
                red &= red - 1;
            }
        }
    }
    for (l, plane) in acc.iter().enumerate() {
        for (i, o) in out.iter_mut().enumerate() {
            if (plane[i / 64] >> (i % 64)) & 1 == 1 {
                o.0 |= 1 << l;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(ctx: &FieldCtx, a: &[FieldElem], b: &[FieldElem], n: usize) -> Vec<FieldElem> {
        let mut out = vec![FieldElem::ZERO; n];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                if i + j < n {
                    out[i + j] = ctx.add(out[i + j], ctx.mul(x, y));
                }
            }
        }
        out
    }

    fn pseudo_random(len: usize, q: usize, seed: u64) -> Vec<FieldElem> {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..len)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                FieldElem(((x >> 33) % q as u64) as u8)
            })
            .collect()
    }

    #[test]
    fn sliced_product_matches_schoolbook() {
        for m in [1, 2, 3] {
            let ctx = FieldCtx::with_degree(m).unwrap();
            for (la, lb, n) in [(100, 100, 200), (3000, 2000, 2500), (64, 700, 900), (1500, 1500, 1000)] {
                let a = pseudo_random(la, ctx.q(), la as u64 + m as u64);
                let b = pseudo_random(lb, ctx.q(), 7 * lb as u64);
                assert_eq!(mul_trunc(&ctx, &a, &b, n), naive(&ctx, &a, &b, n), "m={m} la={la} lb={lb}");
            }
        }
    }

    #[test]
    fn portable_clmul_matches_bit_loop() {
        let a: Vec<u64> = (1..9u64).map(|i| i.wrapping_mul(0x9e3779b97f4a7c15)).collect();
        let b: Vec<u64> = (1..6u64).map(|i| i.wrapping_mul(0xc2b2ae3d27d4eb4f)).collect();
        let mut slow = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            for k in 0..64 {
                if (x >> k) & 1 == 1 {
                    for (j, &y) in b.iter().enumerate() {
                        let bit = i * 64 + k + j * 64;
                        slow[bit / 64] ^= y << (bit % 64);
                        if bit % 64 != 0 {
                            slow[bit / 64 + 1] ^= y >> (64 - bit % 64);
                        }
                    }
                }
            }
        }
        let mut fast = vec![0u64; a.len() + b.len()];
        mul_base_portable(&a, &b, &mut fast);
        assert_eq!(fast, slow);
        let mut hw = vec![0u64; a.len() + b.len()];
        mul_base(&a, &b, &mut hw);
        assert_eq!(hw, slow);
    }

    #[test]
    fn karatsuba_matches_base() {
        let a: Vec<u64> = (0..97u64).map(|i| i.wrapping_mul(0x9e3779b97f4a7c15)).collect();
        let b: Vec<u64> = (0..61u64).map(|i| (i + 3).wrapping_mul(0xc2b2ae3d27d4eb4f)).collect();
        let mut base = vec![0u64; a.len() + b.len()];
        mul_base(&a, &b, &mut base);
        assert_eq!(gf2_mul(&a, &b), base);
    }
}
