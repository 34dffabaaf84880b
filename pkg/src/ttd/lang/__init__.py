"""Guest scripting language: lexer, parser, control-flow graphs, interpreter."""
