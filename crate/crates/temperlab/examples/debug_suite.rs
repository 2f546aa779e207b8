use temperlab::expsum::{predicted_growth_lattice, squared_lattice_sum, suite};

fn main() {
    const RESOLVABLE: f64 = 1e-5;
    let mut rng = suite::seeded_rng(2);
    let mut kept = 0;
    while kept < 50 {
        let (coll, fam) = suite::random_lattice_instance(&mut rng);
        let Ok(p) = predicted_growth_lattice(&coll, &fam) else { continue };
        if p.limit < RESOLVABLE { continue; }
        kept += 1;
        let d = p.degree_u32().unwrap() as i32;
        let r100 = squared_lattice_sum(&coll, &fam, 100.0).unwrap() / 100f64.powi(d);
        let r400 = squared_lattice_sum(&coll, &fam, 400.0).unwrap() / 400f64.powi(d);
        let rel = (r400 - p.limit).abs() / (1.0 + p.limit);
        if rel > 0.05 {
            println!("instance {kept}: dim={} terms={} dirs={:?}", coll.dim, coll.terms.len(), fam.directions);
            for t in &coll.terms {
                println!("  c={} lambda={:?} m={:?}", t.coeff,
                    t.lambda.iter().map(|l| l.to_c64()).collect::<Vec<_>>(), t.monomial);
            }
            println!("  degree={d} limit={} r100={} r400={} rel={rel}", p.limit, r100, r400);
        }
    }
}
