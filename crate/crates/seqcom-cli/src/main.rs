fn main() {
    println!("seqcom");
}
