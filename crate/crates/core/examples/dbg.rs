fn main() {
    use umat_core::chm::*;
    for g in [0.5, 0.6, 0.75, 1.0, 1.25, 1.5] {
        let m = catalogue(CatalogueEntry::T6(g)).unwrap();
        let mods: Vec<f64> = (0..6).flat_map(|i| (0..6).map(move |j| (i,j))).map(|(i,j)| m[(i,j)].norm()).collect();
        let worst = mods.iter().map(|r| (r-1.0).abs()).fold(0.0f64, f64::max);
        println!("g={g}: Z={:.3e} unimod_dev={:.3e}", deviation(&m), worst);
    }
}
