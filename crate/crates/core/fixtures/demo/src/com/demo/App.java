package com.demo;

import java.security.MessageDigest;
import java.security.NoSuchAlgorithmException;

public class App {

    public static void main(String[] args) {
        Config config = Config.standard();
        if (args.length > 0) {
            config = Config.named(args[0]);
        } else {
            System.out.println("using standard configuration");
        }
        try {
            MessageDigest digest = MessageDigest.getInstance("SHA-256");
            byte[] sum = digest.digest(config.banner().getBytes());
            System.out.println("banner checksum: " + Hex.encode(sum));
        } catch (NoSuchAlgorithmException missing) {
            System.err.println("digest unavailable: " + missing.getMessage());
        }
        Sessions sessions = new Sessions();
        sessions.open(config.banner());
        System.out.println("sessions open: " + sessions.count());
    }
}
