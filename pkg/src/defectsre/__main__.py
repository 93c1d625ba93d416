from defectsre.cli import main

raise SystemExit(main())
