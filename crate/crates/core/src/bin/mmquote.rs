fn main() {
    mmquote::cli::main()
}
