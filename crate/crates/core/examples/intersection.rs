use stallings::{Alphabet, Result, Subgroup, Word};

fn main() -> Result<()> {
    let f2 = Alphabet::new(2);
    let gens: Vec<Word> = ["b", "aaa", "AbaBa"]
        .iter()
        .map(|t| Word::parse(f2, t))
        .collect::<Result<_>>()?;
    let h = Subgroup::make(f2, &gens)?;

    let k = Subgroup::make(f2, &[Word::parse(f2, "ab")?, Word::parse(f2, "aaa")?])?;
    let meet = h.intersect(&k)?;
    println!("rank of the intersection: {}", meet.rank());

    if let Some(witness) = h.express(&Word::parse(f2, "Baaab")?)? {
        println!("b^-1 a^3 b = {witness} over the generators of H");
    }
    Ok(())
}
