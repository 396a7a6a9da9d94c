from pathmeasure.app import main

raise SystemExit(main())
