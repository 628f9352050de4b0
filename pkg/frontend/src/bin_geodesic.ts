#!/usr/bin/env node
import { mainGeodesic } from "./cli";

process.exit(mainGeodesic(process.argv.slice(2)));
