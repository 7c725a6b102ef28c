use std::time::Instant;
use uchar_core::admissible::{character_from_pair, induced_idempotent};
use uchar_core::conv::{convolve, idempotent_of_char, ClassFunction};
use uchar_core::dual::MultChar;
use uchar_core::group;
use uchar_core::reduction::reduction_process;

fn main() {
    let g = group::abelian(&[31]);
    let n = 31;
    let a0 = group::trivial_subgroup(&g);
    let n0 = MultChar::trivial(a0.clone(), n);
    let delta = ClassFunction::delta_identity(&g, n);
    let mut m = delta.clone();
    let mut found = Vec::new();
    let (mut t_red, mut t_char, mut t_idem, mut t_abs, mut t_ind, mut t_upd) =
        (0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    for _ in 0..31 {
        let t = Instant::now();
        let out = reduction_process(&g, &m, &a0, &n0).unwrap();
        t_red += t.elapsed().as_secs_f64();
        let t = Instant::now();
        let chi = character_from_pair(&out.pair).unwrap();
        t_char += t.elapsed().as_secs_f64();
        let t = Instant::now();
        let e = idempotent_of_char(&chi).unwrap();
        t_idem += t.elapsed().as_secs_f64();
        let t = Instant::now();
        let _ = convolve(e.as_gfunction(), m.as_gfunction()).unwrap();
        t_abs += t.elapsed().as_secs_f64();
        let t = Instant::now();
        let _ = induced_idempotent(&out.pair).unwrap();
        t_ind += t.elapsed().as_secs_f64();
        found.push(e);
        let t = Instant::now();
        let mut acc = delta.clone();
        for e in &found {
            acc = acc.sub(e);
        }
        m = acc;
        t_upd += t.elapsed().as_secs_f64();
    }
    println!("reduction_process total: {t_red:.3}s");
    println!("character_from_pair:     {t_char:.3}s");
    println!("idempotent_of_char:      {t_idem:.3}s");
    println!("absorb check:            {t_abs:.3}s");
    println!("induced_idempotent:      {t_ind:.3}s");
    println!("M update:                {t_upd:.3}s");
}
