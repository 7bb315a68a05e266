from superselect.cli import main

main()
