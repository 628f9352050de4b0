#!/usr/bin/env node
import { mainEnergy } from "./cli";

process.exit(mainEnergy(process.argv.slice(2)));
