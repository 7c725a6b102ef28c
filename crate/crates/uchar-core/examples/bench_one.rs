use std::time::Instant;
use uchar_core::group;
use uchar_core::oracle::character_table_monomial;
use uchar_core::reduction::character_table_via_reduction;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let inv: Vec<u32> = args[1].split(',').map(|s| s.parse().unwrap()).collect();
    let g = group::abelian(&inv);
    let n = g.exponent();
    let t0 = Instant::now();
    let oracle = character_table_monomial(&g, n, 256).unwrap();
    println!("oracle {} ({:?})", oracle.chars.len(), t0.elapsed());
    let t0 = Instant::now();
    let table = character_table_via_reduction(&g, n, 256).unwrap();
    println!("reduction {} ({:?})", table.rows.len(), t0.elapsed());
    assert_eq!(table.characters(), oracle.chars);
}
