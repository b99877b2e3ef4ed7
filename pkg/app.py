"""Main entry point for the ANP-Lab command line."""

from src.cli.main import main

if __name__ == "__main__":
    main()
