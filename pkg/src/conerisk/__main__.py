from conerisk.cli import main

raise SystemExit(main())
