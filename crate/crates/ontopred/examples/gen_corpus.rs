fn main() {
    let corpus = ontopred::synth::separable_corpus(20, 200, 32, 17);
    corpus.write_files(std::path::Path::new("/tmp/smoke/corpus")).unwrap();
    eprintln!("written");
}
